"""Periodic Bochner projector onto spectra of quadrant-supported functions.

Two realizations are provided:

``spatial``
    conjugation of the quadrant indicator by the transform pair; exact on
    the cyclic window and the production path.
``kernel_quadrature``
    the cotangent-kernel form: a constant term, two one-variable cotangent
    convolutions and one bi-cotangent convolution, with the arguments moved
    off the real axis by ``-i eps``.  It exists to validate the kernel
    formula against the spatial realization as ``eps -> 0+``.

Under the cyclic model a spectrum is the trigonometric polynomial
``h^2 sum_m u_m exp(-i m h xi)`` over the window, so it can be evaluated off
the nodes.  The cotangent convolutions are integrated on an oversampled
frequency grid whose size keeps aliasing of the kernel below ``exp(-40)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError, PreconditionError
from .lattice import (
    GridFunction,
    LatticeGrid,
    QuadrantConvention,
    SpectrumFunction,
    dft_forward,
    dft_inverse,
    quadrant_mask,
    restrict_quadrant,
)

REALIZATIONS = ("spatial", "kernel_quadrature")

# Product of oversampled grid size, h and eps; aliasing error ~ exp(-ALIAS_EXPONENT).
ALIAS_EXPONENT = 40.0
MAX_FINE_NODES = 1 << 20


@dataclass(frozen=True)
class ProjectorConfig:
    conv: QuadrantConvention = QuadrantConvention.CLOSED
    realization: str = "spatial"
    epsilon: float = None

    def __post_init__(self):
        object.__setattr__(self, "conv", QuadrantConvention.coerce(self.conv))
        if self.realization not in REALIZATIONS:
            raise PreconditionError(f"unknown realization {self.realization!r}")
        if self.realization == "kernel_quadrature" and not (self.epsilon and self.epsilon > 0):
            raise PreconditionError("kernel_quadrature needs epsilon > 0")


def cotangent_line_sum(z, grid: LatticeGrid):
    """``sum_{m >= 0} exp(-i m h z) h = h/2 - (i h / 2) cot(h z / 2)`` for ``Im z < 0``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag >= 0):
        raise PreconditionError("cotangent line sum converges only for Im z < 0")
    h = grid.h
    return h / 2 - 0.5j * h / np.tan(h * z / 2)


def _interp_matrix(grid: LatticeGrid, eta: np.ndarray) -> np.ndarray:
    """Map node values of a 1-D spectrum to its trigonometric interpolant at ``eta``."""
    n = grid.size
    # node values -> window coefficients c_m with  g(xi) = sum_m c_m exp(-i m h xi)
    eye = np.eye(n)
    coeffs = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(eye, axes=0), axis=0), axes=0)
    phase = np.exp(-1j * np.outer(eta, grid.points))
    return phase @ coeffs


def _line_operators(grid: LatticeGrid, eps: float):
    """Quadrature matrices for the mean and the cotangent convolution on one axis.

    Returns ``(I, C)`` with ``(I g)(xi) = (2 pi)^-1 int g`` and
    ``(C g)(xi) = (2 pi)^-1 int cot(h (xi - eta - i eps) / 2) g(eta) d eta``.
    """
    h = grid.h
    n_fine = grid.size
    while n_fine * h * eps < ALIAS_EXPONENT and n_fine < MAX_FINE_NODES:
        n_fine *= 2
    if n_fine * h * eps < ALIAS_EXPONENT:
        warnings.warn(
            f"eps={eps:g} needs more than {MAX_FINE_NODES} quadrature nodes; "
            "kernel aliasing is not negligible",
            RuntimeWarning,
            stacklevel=3,
        )
    period = 2 * np.pi / h
    d_eta = period / n_fine
    eta = -np.pi / h + d_eta * np.arange(n_fine)
    interp = _interp_matrix(grid, eta)
    xi = grid.frequencies
    cot = 1.0 / np.tan(h * (xi[:, None] - eta[None, :] - 1j * eps) / 2)
    scale = d_eta / (2 * np.pi)
    C = scale * (cot @ interp)
    I = scale * np.ones((grid.size, n_fine)) @ interp
    if not (np.all(np.isfinite(C)) and np.all(np.isfinite(I))):
        raise NumericalError("NaN or overflow in cotangent quadrature")
    return I, C


def _apply_pair(A1, A2, values):
    return A1 @ values @ A2.T


def kernel_quadrature_plus(s: SpectrumFunction, eps: float, conv="closed") -> SpectrumFunction:
    """Four-term cotangent form of the projector at regularization ``eps``.

    The one-variable factor is ``h/2 - (i h/2) cot`` for the closed quadrant
    (sum from ``m = 0``) and ``-h/2 - (i h/2) cot`` for the open quadrant
    (sum from ``m = 1``).  On inputs vanishing on the axes only the
    bi-cotangent term survives, so both conventions agree there.
    """
    grid = s.grid
    conv = QuadrantConvention.coerce(conv)
    if eps < 1e-3 * grid.dxi:
        warnings.warn(
            f"eps={eps:g} is below 1e-3 of the frequency spacing; "
            "the cotangent quadrature is ill-conditioned",
            RuntimeWarning,
            stacklevel=2,
        )
    h = grid.h
    I, C = _line_operators(grid, eps)
    const = h / 2 if conv is QuadrantConvention.CLOSED else -h / 2
    v = s.values
    out = (
        const * const * _apply_pair(I, I, v)
        - 0.5j * h * const * (_apply_pair(C, I, v) + _apply_pair(I, C, v))
        - 0.25 * h * h * _apply_pair(C, C, v)
    )
    if not np.all(np.isfinite(out)):
        raise NumericalError("NaN in kernel quadrature result")
    return SpectrumFunction(grid, out)


def project_plus(s: SpectrumFunction, cfg: ProjectorConfig = None) -> SpectrumFunction:
    cfg = cfg or ProjectorConfig()
    if cfg.realization == "spatial":
        return dft_forward(restrict_quadrant(dft_inverse(s), cfg.conv))
    return kernel_quadrature_plus(s, cfg.epsilon, cfg.conv)


def project_minus(s: SpectrumFunction, cfg: ProjectorConfig = None) -> SpectrumFunction:
    return s - project_plus(s, cfg)


def direct_sum_regions(grid: LatticeGrid, conv="closed"):
    """Support regions of the two summands of the direct-sum decomposition.

    The first summand lives on the quadrant (per ``conv``), the second on the
    complement of the open quadrant.  Under the closed convention they share
    the coordinate axes.
    """
    plus = quadrant_mask(grid, conv)
    minus = ~quadrant_mask(grid, "open")
    return plus, minus


def decomposition_overlap(grid: LatticeGrid, conv="closed") -> np.ndarray:
    plus, minus = direct_sum_regions(grid, conv)
    return plus & minus


def decomposition_is_unique(u: GridFunction, conv="closed") -> bool:
    """True when no nonzero part of ``u`` sits where both summands may live.

    Any two decompositions differ by a function supported on the overlap, so
    the decomposition of ``u`` is unique iff ``u`` vanishes there (exactly).
    """
    overlap = decomposition_overlap(u.grid, conv)
    return bool(np.all(u.values[overlap] == 0))
