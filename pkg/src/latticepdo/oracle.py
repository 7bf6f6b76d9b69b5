"""Brute-force reference: the digital operator as a dense convolution matrix.

The truncated problem lives on an ``M x M`` corner of the quadrant.  It
differs from the infinite-quadrant problem near the far edges, so
comparisons are made on the interior quarter ``[0, M/2)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import NumericalError, PreconditionError
from .lattice import GridFunction, QuadrantConvention
from .symbols import PeriodicSymbol

DECAY_GUARD = 1e-8
MAX_COND = 1e12


@dataclass
class DenseProblem:
    symbol: PeriodicSymbol
    M: int
    conv: QuadrantConvention
    matrix: np.ndarray
    offset: int  # first quadrant index: 0 (closed) or 1 (open)
    rhs: np.ndarray = None

    @property
    def grid(self):
        return self.symbol.grid

    def window_indices(self):
        return np.arange(self.offset, self.offset + self.M)

    def restrict(self, u: GridFunction) -> np.ndarray:
        """Window values of ``u`` flattened row-major in ``(m1, m2)``."""
        idx = self.window_indices() + self.grid.N
        return u.values[np.ix_(idx, idx)].reshape(-1)

    def extend(self, vec: np.ndarray) -> GridFunction:
        """Zero extension of a window vector to the full grid."""
        grid = self.grid
        out = np.zeros((grid.size, grid.size), dtype=complex)
        idx = self.window_indices() + grid.N
        out[np.ix_(idx, idx)] = np.asarray(vec).reshape(self.M, self.M)
        return GridFunction(grid, out)

    def with_rhs(self, v: GridFunction) -> "DenseProblem":
        self.rhs = self.restrict(v)
        return self


def kernel_tail(sym: PeriodicSymbol, radius: int) -> float:
    """``max |K|`` over offsets with ``max(|m1|, |m2|) >= radius``, relative to ``max |K|``."""
    k = np.abs(sym.kernel().values)
    m1, m2 = sym.grid.index_mesh()
    ring = np.maximum(np.abs(m1), np.abs(m2)) >= radius
    peak = k.max()
    if peak == 0 or not ring.any():
        return 0.0
    return float(k[ring].max() / peak)


def assemble_dense(sym: PeriodicSymbol, M: int, conv="closed",
                   decay_guard: float = DECAY_GUARD) -> DenseProblem:
    """Matrix with entries ``h^2 K(x - y)`` on the quadrant window of size ``M``.

    Rows and columns run over ``{0..M-1}^2`` (closed) or ``{1..M}^2`` (open),
    flattened row-major.
    """
    conv = QuadrantConvention.coerce(conv)
    grid = sym.grid
    if not 1 <= M <= grid.N // 2:
        raise PreconditionError(f"dense window M={M} must satisfy 1 <= M <= N/2 = {grid.N // 2}")
    tail = kernel_tail(sym, M)
    if tail > decay_guard:
        raise PreconditionError(
            f"kernel has not decayed at radius {M} (tail/peak = {tail:.2e} > {decay_guard:g})"
        )
    K = sym.kernel().values
    N = grid.N
    idx = np.arange(M)
    # offsets x - y for all pairs in one dimension, shifted to array positions
    d = idx[:, None] - idx[None, :] + N
    blocks = K[d[:, None, :, None], d[None, :, None, :]]  # [i1, i2, j1, j2]
    matrix = grid.h ** 2 * blocks.reshape(M * M, M * M)
    offset = 0 if conv is QuadrantConvention.CLOSED else 1
    return DenseProblem(sym, M, conv, matrix, offset)


def dense_apply(p: DenseProblem, u: GridFunction) -> GridFunction:
    """Matrix action on the window values of ``u`` (zero outside the window)."""
    return p.extend(p.matrix @ p.restrict(u))


def dense_solve(p: DenseProblem, max_cond: float = MAX_COND) -> GridFunction:
    if p.rhs is None:
        raise PreconditionError("dense problem has no right-hand side")
    cond = np.linalg.cond(p.matrix)
    if not cond <= max_cond:
        raise NumericalError(f"dense matrix condition number {cond:.2e} exceeds {max_cond:g}")
    lu = linalg.lu_factor(p.matrix)
    sol = linalg.lu_solve(lu, p.rhs)
    scale = np.abs(p.rhs).max()
    res = np.abs(p.matrix @ sol - p.rhs).max()
    if scale > 0 and res > 1e-10 * scale:
        raise NumericalError(f"dense solve residual {res / scale:.2e} too large")
    return p.extend(sol)


def interior_error(p: DenseProblem, u_ref: GridFunction, u_dense: GridFunction) -> float:
    """Max difference on the interior quarter, relative to ``max |u_ref|`` there."""
    N = p.grid.N
    idx = np.arange(p.offset, p.offset + p.M // 2) + N
    a = u_ref.values[np.ix_(idx, idx)]
    b = u_dense.values[np.ix_(idx, idx)]
    scale = np.abs(a).max()
    err = np.abs(a - b).max()
    return float(err / scale) if scale > 0 else float(err)
