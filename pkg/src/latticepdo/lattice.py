"""Lattice grids, grid functions and the discrete Fourier pair on a cyclic window.

The infinite lattice ``hZ^2`` is modelled by the window ``{-N, ..., N-1}^2``
with cyclic wrap.  Arrays are stored centred: the value at lattice index
``m`` lives at array position ``m + N``.  Frequencies use the same layout,
``xi_k = (pi / (N h)) k`` for ``k`` in ``{-N, ..., N-1}``.

Forward transform (kernel ``exp(-i x.xi)``, weight ``h^2``)::

    u~(xi) = sum_x exp(-i x.xi) u(x) h^2

Inverse transform (exact quadrature of the integral over the period square)::

    u(x) = (2 pi)^-2 sum_xi exp(i x.xi) u~(xi) dxi^2
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .exceptions import PreconditionError

__all__ = [
    "QuadrantConvention",
    "LatticeGrid",
    "GridFunction",
    "SpectrumFunction",
    "LineFunction",
    "LineSpectrum",
    "dft_forward",
    "dft_inverse",
    "dft1_forward",
    "dft1_inverse",
    "divided_difference",
    "discrete_laplacian",
    "restrict_quadrant",
    "quadrant_mask",
    "impulse",
    "zeta",
    "zeta_squared",
]


class QuadrantConvention(str, enum.Enum):
    """Whether quadrant indicators include the coordinate axes."""

    CLOSED = "closed"
    OPEN = "open"

    @classmethod
    def coerce(cls, value) -> "QuadrantConvention":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise PreconditionError(f"unknown quadrant convention {value!r}") from None


@dataclass(frozen=True)
class LatticeGrid:
    """Lattice step ``h`` and per-axis half-window ``N`` (window is 2N points)."""

    h: float
    N: int

    def __post_init__(self):
        if not (self.h > 0 and np.isfinite(self.h)):
            raise PreconditionError(f"lattice step must be positive, got {self.h}")
        n = int(self.N)
        if n != self.N or n < 2 or n & (n - 1):
            raise PreconditionError(f"N must be a power of two >= 2, got {self.N}")

    @classmethod
    def from_window(cls, h: float, half_length: float) -> "LatticeGrid":
        """Grid whose spatial window is ``[-L, L)`` with ``L = half_length``."""
        n = half_length / h
        if abs(n - round(n)) > 1e-9:
            raise PreconditionError(f"half_length {half_length} is not a multiple of h={h}")
        return cls(h, int(round(n)))

    @property
    def hbar(self) -> float:
        return 1.0 / self.h

    @property
    def size(self) -> int:
        return 2 * self.N

    @property
    def dxi(self) -> float:
        return np.pi / (self.N * self.h)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.N, self.N)

    @property
    def points(self) -> np.ndarray:
        """1-D lattice coordinates ``m h``."""
        return self.indices * self.h

    @property
    def frequencies(self) -> np.ndarray:
        """1-D frequency nodes on ``[-pi/h, pi/h)``."""
        return self.indices * self.dxi

    def mesh(self):
        return np.meshgrid(self.points, self.points, indexing="ij")

    def frequency_mesh(self):
        return np.meshgrid(self.frequencies, self.frequencies, indexing="ij")

    def index_mesh(self):
        return np.meshgrid(self.indices, self.indices, indexing="ij")

    def position(self, m: int) -> int:
        """Array position of lattice index ``m``."""
        if not -self.N <= m < self.N:
            raise IndexError(f"index {m} outside window of half-size {self.N}")
        return m + self.N

    def metadata(self, convention=None) -> dict:
        meta = {"h": repr(float(self.h)), "N": str(self.N)}
        if convention is not None:
            meta["convention"] = QuadrantConvention.coerce(convention).value
        return meta


def _check_shape(grid: LatticeGrid, values: np.ndarray, ndim: int) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    expected = (grid.size,) * ndim
    if values.shape != expected:
        raise PreconditionError(f"expected shape {expected}, got {values.shape}")
    return values


@dataclass(frozen=True)
class GridFunction:
    """Complex samples ``u(m h)`` on the 2-D spatial window."""

    grid: LatticeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _check_shape(self.grid, self.values, 2))

    def __add__(self, other):
        _same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return GridFunction(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def at(self, m1: int, m2: int) -> complex:
        return self.values[self.grid.position(m1), self.grid.position(m2)]

    def edge_decay(self) -> float:
        """Max modulus on the outermost index ring relative to the global max.

        Large values mean the data reaches the window edge and the cyclic
        model wraps it around.
        """
        a = np.abs(self.values)
        peak = a.max()
        if peak == 0:
            return 0.0
        ring = max(a[0].max(), a[-1].max(), a[:, 0].max(), a[:, -1].max())
        return float(ring / peak)

    @classmethod
    def zeros(cls, grid: LatticeGrid) -> "GridFunction":
        return cls(grid, np.zeros((grid.size, grid.size), dtype=complex))


@dataclass(frozen=True)
class SpectrumFunction:
    """Samples of a periodic function on the frequency nodes of the period square."""

    grid: LatticeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _check_shape(self.grid, self.values, 2))

    def __add__(self, other):
        _same_grid(self, other)
        return SpectrumFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return SpectrumFunction(self.grid, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, SpectrumFunction):
            _same_grid(self, other)
            return SpectrumFunction(self.grid, self.values * other.values)
        return SpectrumFunction(self.grid, self.values * other)

    __rmul__ = __mul__


@dataclass(frozen=True)
class LineFunction:
    """Samples of a 1-D lattice function on ``{-N, ..., N-1} h``."""

    grid: LatticeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _check_shape(self.grid, self.values, 1))

    def __add__(self, other):
        _same_grid(self, other)
        return LineFunction(self.grid, self.values + other.values)

    def __mul__(self, scalar):
        return LineFunction(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def edge_decay(self) -> float:
        a = np.abs(self.values)
        peak = a.max()
        return 0.0 if peak == 0 else float(max(a[0], a[-1]) / peak)


@dataclass(frozen=True)
class LineSpectrum:
    """Samples of a 1-D periodic spectrum on the frequency nodes."""

    grid: LatticeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _check_shape(self.grid, self.values, 1))

    def at_zero(self) -> complex:
        return complex(self.values[self.grid.N])


def _same_grid(a, b):
    if a.grid != b.grid:
        raise PreconditionError(f"grid mismatch: {a.grid} vs {b.grid}")


def _fwd(values, axes):
    shifted = np.fft.ifftshift(values, axes=axes)
    return np.fft.fftshift(np.fft.fftn(shifted, axes=axes), axes=axes)


def _inv(values, axes):
    shifted = np.fft.ifftshift(values, axes=axes)
    return np.fft.fftshift(np.fft.ifftn(shifted, axes=axes), axes=axes)


def dft_forward(u: GridFunction) -> SpectrumFunction:
    h = u.grid.h
    return SpectrumFunction(u.grid, h * h * _fwd(u.values, (0, 1)))


def dft_inverse(s: SpectrumFunction) -> GridFunction:
    # ifftn already carries 1/(2N)^2 = (dxi / 2pi)^2 * h^2
    h = s.grid.h
    return GridFunction(s.grid, _inv(s.values, (0, 1)) / (h * h))


def dft1_forward(f: LineFunction) -> LineSpectrum:
    return LineSpectrum(f.grid, f.grid.h * _fwd(f.values, (0,)))


def dft1_inverse(s: LineSpectrum) -> LineFunction:
    return LineFunction(s.grid, _inv(s.values, (0,)) / s.grid.h)


def zeta(grid: LatticeGrid, sign: int = -1) -> np.ndarray:
    """1-D difference multiplier ``h^-1 (exp(sign i h xi) - 1)`` on the nodes.

    ``sign=-1`` is the quadrant (plus) side, ``sign=+1`` its reflection.
    """
    return (np.exp(sign * 1j * grid.h * grid.frequencies) - 1.0) / grid.h


def zeta_squared(grid: LatticeGrid) -> np.ndarray:
    z = zeta(grid)
    return z[:, None] ** 2 + z[None, :] ** 2


def divided_difference(u: GridFunction, axis: int, order: int = 1,
                       stencil: str = "multiplier") -> GridFunction:
    """Divided difference of order 1 or 2 along ``axis`` (1 or 2), cyclic wrap.

    ``stencil="multiplier"`` (default) is the difference whose transform is
    ``h^-1 (exp(-i h xi_k) - 1)`` under this module's transform convention,
    i.e. ``h^-1 (u(x - h e_k) - u(x))``.  ``stencil="forward"`` is the
    forward difference ``h^-1 (u(x + h e_k) - u(x))``, whose multiplier is
    ``h^-1 (exp(+i h xi_k) - 1)``.
    """
    if axis not in (1, 2) or order not in (1, 2):
        raise PreconditionError("axis and order must each be 1 or 2")
    if stencil == "multiplier":
        step = 1
    elif stencil == "forward":
        step = -1
    else:
        raise PreconditionError(f"unknown stencil {stencil!r}")
    vals = u.values
    for _ in range(order):
        vals = (np.roll(vals, step, axis=axis - 1) - vals) / u.grid.h
    return GridFunction(u.grid, vals)


def discrete_laplacian(u: GridFunction) -> GridFunction:
    """Sum of second divided differences; multiplier ``zeta_1^2 + zeta_2^2``."""
    return GridFunction(
        u.grid,
        divided_difference(u, 1, 2).values + divided_difference(u, 2, 2).values,
    )


def quadrant_mask(grid: LatticeGrid, conv="closed", side: int = 1) -> np.ndarray:
    """Boolean indicator of ``side * K`` on the window (axes per ``conv``)."""
    conv = QuadrantConvention.coerce(conv)
    m1, m2 = grid.index_mesh()
    m1, m2 = side * m1, side * m2
    if conv is QuadrantConvention.CLOSED:
        return (m1 >= 0) & (m2 >= 0)
    return (m1 > 0) & (m2 > 0)


def half_line_mask(grid: LatticeGrid, closed: bool = True) -> np.ndarray:
    return grid.indices >= 0 if closed else grid.indices > 0


def restrict_quadrant(u: GridFunction, conv="closed") -> GridFunction:
    return GridFunction(u.grid, np.where(quadrant_mask(u.grid, conv), u.values, 0))


def impulse(grid: LatticeGrid, m1: int = 0, m2: int = 0, weight: complex = None) -> GridFunction:
    """Lattice delta at ``(m1 h, m2 h)``; default weight ``h^-2`` has unit spectrum."""
    vals = np.zeros((grid.size, grid.size), dtype=complex)
    vals[grid.position(m1), grid.position(m2)] = grid.h ** -2 if weight is None else weight
    return GridFunction(grid, vals)


def exterior_mass(u: GridFunction, mask: np.ndarray) -> float:
    """Max modulus outside ``mask`` relative to the global max modulus."""
    a = np.abs(u.values)
    peak = a.max()
    if peak == 0:
        return 0.0
    outside = a[~mask]
    return float(outside.max() / peak) if outside.size else 0.0
