"""Digital operators and the quadrant solution procedures.

All procedures work on spectra and are exact on the cyclic window.  The
equation ``(A u)(x) = v(x)`` is imposed on the quadrant: for the unique
solve on the quadrant of the active convention, for the boundary value
problems on the open quadrant (the layer terms live on the axes).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import AdmissibilityError, NumericalError, PreconditionError
from .lattice import (
    GridFunction,
    LatticeGrid,
    LineFunction,
    LineSpectrum,
    QuadrantConvention,
    SpectrumFunction,
    dft1_forward,
    dft1_inverse,
    dft_forward,
    dft_inverse,
    exterior_mass,
    half_line_mask,
    quadrant_mask,
    zeta,
)
from .projector import ProjectorConfig, project_plus
from .sobolev import SUPPORT_TOL, norm_1d, norm_hs, norm_hs_plus
from .symbols import (
    PeriodicSymbol,
    QnPolynomial,
    WaveFactorization,
    certify_order,
    elementary_minus_factor,
)

SUPPORT_CHECK = 1e-10
RESIDUAL_CHECK = 1e-8
COMPAT_TOL = 1e-10
TRACE_CHECK = 1e-6


@dataclass(frozen=True)
class DigitalOperator:
    symbol: PeriodicSymbol

    @property
    def grid(self) -> LatticeGrid:
        return self.symbol.grid

    def __call__(self, u: GridFunction) -> GridFunction:
        return apply_operator(self, u)


def apply_operator(op, u: GridFunction) -> GridFunction:
    """``F^-1 (A~ . F u)`` on the whole window."""
    sym = op.symbol if isinstance(op, DigitalOperator) else op
    if sym.grid != u.grid:
        raise PreconditionError("operator and function live on different grids")
    return dft_inverse(SpectrumFunction(u.grid, sym.values * dft_forward(u).values))


def _rel_max(err: np.ndarray, scale: np.ndarray) -> float:
    denom = np.abs(scale).max()
    num = np.abs(err).max() if err.size else 0.0
    if denom == 0:
        return float(num)
    return float(num / denom)


def equation_residual(symbol: PeriodicSymbol, u: GridFunction, v: GridFunction,
                      region="open") -> float:
    """``max |A u - v|`` over the quadrant ``region``, relative to ``max |v|`` (or ``|A u|``)."""
    au = apply_operator(symbol, u)
    mask = quadrant_mask(u.grid, region)
    scale = v.values[mask] if np.abs(v.values).max() > 0 else au.values
    return _rel_max(au.values[mask] - v.values[mask], scale)


def _check_unique_window(kappa: float, s: float):
    if not abs(kappa - s) < 0.5:
        raise AdmissibilityError(
            f"unique solvability needs |index - s| < 1/2, got index={kappa:g}, s={s:g}"
        )


def _split_index(kappa: float, s: float):
    """Return ``(n, delta)`` with ``index - s = n + delta``, ``|delta| < 1/2``."""
    n = int(np.round(kappa - s))
    delta = kappa - s - n
    if not abs(delta) < 0.5:
        raise AdmissibilityError(f"index - s = {kappa - s:g} sits on a half-integer")
    return n, delta


def _check_quadrant_rhs(v: GridFunction, conv):
    if exterior_mass(v, quadrant_mask(v.grid, conv)) > SUPPORT_TOL:
        raise PreconditionError("right-hand side is not supported in the quadrant")


def solve_unique(fact: WaveFactorization, s: float, v: GridFunction, conv="closed",
                 continuation: GridFunction = None, verify: bool = True) -> GridFunction:
    """Unique quadrant solution ``u~ = A_+^-1 B (A_-^-1 (l v)~)``.

    ``continuation`` (optional) is added to the zero extension of ``v`` and
    must be supported outside the quadrant; the result does not depend on it.
    """
    conv = QuadrantConvention.coerce(conv)
    _check_unique_window(fact.index, s)
    _check_quadrant_rhs(v, conv)
    lv = v
    if continuation is not None:
        if np.abs(continuation.values[quadrant_mask(v.grid, conv)]).max() > 0:
            raise PreconditionError("continuation tail must vanish on the quadrant")
        lv = v + continuation
    inner = SpectrumFunction(v.grid, dft_forward(lv).values / fact.minus.values)
    proj = project_plus(inner, ProjectorConfig(conv))
    u = dft_inverse(SpectrumFunction(v.grid, proj.values / fact.plus.values))
    if verify:
        ext = exterior_mass(u, quadrant_mask(u.grid, conv))
        res = equation_residual(fact.symbol, u, v, conv)
        if ext > SUPPORT_CHECK or res > RESIDUAL_CHECK:
            raise NumericalError(
                f"unique solve failed verification (exterior {ext:.2e}, residual {res:.2e})"
            )
    return u


def smooth_exterior_tail(grid: LatticeGrid, conv="closed", amplitude: float = 1.0,
                         decay: float = 1.0) -> GridFunction:
    """A decaying tail supported outside the quadrant, for continuation tests."""
    m1, m2 = grid.index_mesh()
    vals = amplitude * np.exp(-decay * (np.abs(m1) + np.abs(m2))) * np.cos(0.7 * m1 - 0.3 * m2)
    vals = np.where(quadrant_mask(grid, conv), 0.0, vals) / grid.h ** 2
    return GridFunction(grid, vals)


# -- general solution ----------------------------------------------------------

def _as_line_spectrum(x, grid):
    if isinstance(x, LineSpectrum):
        return x
    if isinstance(x, LineFunction):
        return dft1_forward(x)
    return LineSpectrum(grid, np.asarray(x))


@dataclass
class GeneralSolutionSpec:
    """Free data of the general solution: ``Q_n`` and layer spectra ``c_k``, ``d_k``.

    ``c_layers[k]`` is a spectrum in ``xi_1``, ``d_layers[k]`` in ``xi_2``.

    ``stencil`` picks the difference multiplier inside ``Q_n`` and the layer
    powers ``zeta^k``.  With ``"multiplier"`` (plus-type, the default) the
    solution stays in the closed quadrant but for ``n >= 2`` the equation
    picks up a residual on the strips ``1 <= m_i < n``.  With ``"forward"``
    (minus-type) the equation holds exactly on the open quadrant for every
    ``n`` but the solution spills up to ``n`` steps outside it.
    """

    n: int
    qn: object
    c_layers: list = field(default_factory=list)
    d_layers: list = field(default_factory=list)
    stencil: str = "multiplier"

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError("general solution needs n >= 1")
        grid = self.qn.grid
        zero = LineSpectrum(grid, np.zeros(grid.size))
        self.c_layers = [_as_line_spectrum(c, grid) for c in self.c_layers] or [zero] * self.n
        self.d_layers = [_as_line_spectrum(d, grid) for d in self.d_layers] or [zero] * self.n
        if self.stencil not in ("multiplier", "forward"):
            raise PreconditionError(f"unknown stencil {self.stencil!r}")
        if self.stencil == "forward" and not isinstance(self.qn, QnPolynomial):
            raise PreconditionError("the forward stencil needs a catalog QnPolynomial")
        if len(self.c_layers) != self.n or len(self.d_layers) != self.n:
            raise PreconditionError(
                f"need exactly n={self.n} layer functions of each kind, "
                f"got {len(self.c_layers)} and {len(self.d_layers)}"
            )

    def layer_classes(self, s: float, kappa: float):
        """Smoothness classes ``s_k = s - index + k + 1/2`` of the layer functions."""
        return [s - kappa + k + 0.5 for k in range(self.n)]

    @property
    def zeta_sign(self) -> int:
        return -1 if self.stencil == "multiplier" else 1

    def qn_symbol(self) -> PeriodicSymbol:
        if self.stencil == "forward":
            q = elementary_minus_factor(self.qn.grid, self.qn.c, self.qn.n)
            return PeriodicSymbol(q.grid, q.values, float(self.qn.n), f"Qf({self.qn.c},{self.qn.n})")
        return self.qn.as_symbol() if isinstance(self.qn, QnPolynomial) else self.qn


def layer_spectrum(spec: GeneralSolutionSpec) -> np.ndarray:
    """``sum_k c_k(xi_1) zeta_2^k + d_k(xi_2) zeta_1^k`` on the 2-D nodes."""
    grid = spec.qn.grid
    z = zeta(grid, spec.zeta_sign)
    out = np.zeros((grid.size, grid.size), dtype=complex)
    for k in range(spec.n):
        out += spec.c_layers[k].values[:, None] * (z ** k)[None, :]
        out += spec.d_layers[k].values[None, :] * (z ** k)[:, None]
    return out


def general_solution(fact: WaveFactorization, s: float, v: GridFunction,
                     spec: GeneralSolutionSpec, conv="closed") -> GridFunction:
    """``u~ = A_+^-1 Q B(Q^-1 A_-^-1 (l v)~) + A_+^-1 sum_k (c_k zeta_2^k + d_k zeta_1^k)``."""
    n, _ = _split_index(fact.index, s)
    if n != spec.n:
        raise AdmissibilityError(
            f"index - s = {fact.index - s:g} calls for n={n}, spec has n={spec.n}"
        )
    q = spec.qn_symbol()
    if q.grid != v.grid or fact.grid != v.grid:
        raise PreconditionError("grid mismatch in general solution")
    c1, _ = certify_order(q, "modulus_sum", order=spec.n)
    if not c1 > 0:
        raise PreconditionError("Q_n fails the order certificate (vanishes on the grid)")
    _check_quadrant_rhs(v, conv)
    inner = dft_forward(v).values / (fact.minus.values * q.values)
    proj = project_plus(SpectrumFunction(v.grid, inner), ProjectorConfig(conv)).values
    total = (q.values * proj + layer_spectrum(spec)) / fact.plus.values
    return dft_inverse(SpectrumFunction(v.grid, total))


def general_apriori_ratio(u, v, spec, fact, s, conv="closed", weight_mode="modulus_sum"):
    """``||u||_s / (||v||+_{s-alpha} + sum_k [c_k]_{s_k} + [d_k]_{s_k})``."""
    denom = norm_hs_plus(v, s - fact.order, conv, weight_mode)
    for sk, c, d in zip(spec.layer_classes(s, fact.index), spec.c_layers, spec.d_layers):
        denom += norm_1d(c, sk, weight_mode) + norm_1d(d, sk, weight_mode)
    return norm_hs(u, s, weight_mode) / denom


# -- boundary value problems ---------------------------------------------------

@dataclass(frozen=True)
class BoundaryData:
    """``f`` on the ``x2`` axis (function of ``x2``), ``g`` on the ``x1`` axis."""

    f: LineFunction
    g: LineFunction

    def __post_init__(self):
        if self.f.grid != self.g.grid:
            raise PreconditionError("boundary data on different grids")

    @property
    def grid(self):
        return self.f.grid

    @property
    def f_spectrum(self) -> LineSpectrum:
        return dft1_forward(self.f)

    @property
    def g_spectrum(self) -> LineSpectrum:
        return dft1_forward(self.g)

    def half_line_leak(self) -> float:
        mask = half_line_mask(self.grid)
        vals = np.concatenate([self.f.values, self.g.values])
        peak = np.abs(vals).max()
        if peak == 0:
            return 0.0
        outside = np.concatenate([self.f.values[~mask], self.g.values[~mask]])
        return float(np.abs(outside).max() / peak)


@dataclass
class DirichletSystem:
    fact: WaveFactorization
    bdata: BoundaryData
    matrix: np.ndarray
    rhs: np.ndarray
    a0: np.ndarray
    b0: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    F: np.ndarray
    G: np.ndarray
    cond: float


def _oversampled_line_integrals(ainv: np.ndarray, grid: LatticeGrid, oversample: int):
    """``int A^-1 d xi_1`` and ``int A^-1 d xi_2`` by node sums.

    With ``oversample > 1`` the symbol is trigonometrically interpolated onto
    a finer frequency grid first (zero padding of its kernel).
    """
    if oversample == 1:
        return ainv.sum(axis=0) * grid.dxi, ainv.sum(axis=1) * grid.dxi
    n = grid.size
    big = n * oversample
    coeffs = np.fft.ifft2(np.fft.ifftshift(ainv))
    padded = np.zeros((big, big), dtype=complex)
    half = n // 2
    idx = np.r_[0:half, big - half:big]
    src = np.r_[0:half, n - half:n]
    padded[np.ix_(idx, idx)] = coeffs[np.ix_(src, src)]
    fine = np.fft.fft2(padded)
    # rows of the fine grid that coincide with the coarse nodes
    pick = np.arange(0, big, oversample)
    d = grid.dxi / oversample
    a0 = fine[:, pick].sum(axis=0) * d
    b0 = fine[pick, :].sum(axis=1) * d
    return np.fft.fftshift(a0), np.fft.fftshift(b0)


def dirichlet_assemble(fact: WaveFactorization, bdata: BoundaryData, s: float = None,
                       oversample: int = 1) -> DirichletSystem:
    """Assemble the pair of integral equations for the layer spectra ``c0``, ``d0``.

    The traces satisfy ``int u~ d xi_1 = 2 pi f~(xi_2)`` (and likewise for
    ``g``) with the 1-D transform weight ``h``.
    """
    if s is not None:
        n, _ = _split_index(fact.index, s)
        if n != 1:
            raise AdmissibilityError("Dirichlet reduction needs index - s = 1 + delta")
    if bdata.grid != fact.grid:
        raise PreconditionError("boundary data and factorization on different grids")
    grid = fact.grid
    ainv = 1.0 / fact.plus.values
    a0, b0 = _oversampled_line_integrals(ainv, grid, oversample)
    # relative to the largest value the line integral could take
    scale = np.abs(ainv).max() * 2 * np.pi / grid.h
    for name, arr in (("a0", a0), ("b0", b0)):
        if np.abs(arr).min() < 1e-10 * max(np.abs(arr).max(), scale):
            raise NumericalError(
                f"{name} vanishes on the grid (min |{name}| = {np.abs(arr).min():.2e}); "
                "the Dirichlet reduction is singular"
            )
    ftil = bdata.f_spectrum.values
    gtil = bdata.g_spectrum.values
    F = 2 * np.pi * ftil / a0
    G = 2 * np.pi * gtil / b0
    M1 = ainv / a0[None, :]
    M2 = ainv / b0[:, None]
    n = grid.size
    dx = grid.dxi
    # unknowns: c0 on xi_1 nodes, then d0 on xi_2 nodes
    top = np.hstack([dx * M1.T, np.eye(n)])
    bottom = np.hstack([np.eye(n), dx * M2])
    matrix = np.vstack([top, bottom])
    rhs = np.concatenate([F, G])
    # c0 + k, d0 - k give the same u; pin c0(x1 = 0) = 0
    gauge = np.concatenate([np.ones(n), np.zeros(n)])[None, :]
    aug = np.vstack([matrix, gauge])
    sv = np.linalg.svd(aug, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    return DirichletSystem(fact, bdata, aug, np.concatenate([rhs, [0.0]]),
                           a0, b0, M1, M2, F, G, cond)


@dataclass
class DirichletSolution:
    c0: LineSpectrum
    d0: LineSpectrum
    u: GridFunction
    system_residual: float
    trace_error: float
    cond: float


def dirichlet_traces(u: GridFunction):
    """``(u(0, x2), u(x1, 0))`` as line functions."""
    N = u.grid.N
    return LineFunction(u.grid, u.values[N, :]), LineFunction(u.grid, u.values[:, N])


def dirichlet_solve(system: DirichletSystem, max_cond: float = 1e12) -> DirichletSolution:
    if not system.cond <= max_cond:
        raise NumericalError(f"Dirichlet system condition number {system.cond:.2e} too large")
    bd = system.bdata
    corner = abs(bd.f.values[bd.grid.N] - bd.g.values[bd.grid.N])
    if corner > COMPAT_TOL * max(1.0, np.abs(bd.f.values).max(), np.abs(bd.g.values).max()):
        raise PreconditionError(f"Dirichlet data disagree at the corner: |f(0) - g(0)| = {corner:.2e}")
    sol, *_ = np.linalg.lstsq(system.matrix, system.rhs, rcond=None)
    res = _rel_max(system.matrix @ sol - system.rhs, system.rhs) if np.any(system.rhs) else float(
        np.abs(system.matrix @ sol).max())
    grid = bd.grid
    n = grid.size
    c0, d0 = sol[:n], sol[n:]
    total = (c0[:, None] + d0[None, :]) / system.fact.plus.values
    u = dft_inverse(SpectrumFunction(grid, total))
    tf, tg = dirichlet_traces(u)
    scale = max(np.abs(bd.f.values).max(), np.abs(bd.g.values).max())
    err = max(np.abs(tf.values - bd.f.values).max(), np.abs(tg.values - bd.g.values).max())
    trace_error = float(err / scale) if scale > 0 else float(err)
    if trace_error > TRACE_CHECK:
        raise NumericalError(f"Dirichlet traces not reproduced (relative error {trace_error:.2e})")
    return DirichletSolution(LineSpectrum(grid, c0), LineSpectrum(grid, d0), u, res,
                             trace_error, system.cond)


@dataclass
class NonlocalResult:
    u: GridFunction
    c0: LineSpectrum
    d0: LineSpectrum
    transformed_error: float
    spatial_error: float
    residual: float
    exterior: float
    apriori_ratio: float
    compatibility: tuple


def compatibility_defect(bdata: BoundaryData):
    return bdata.f_spectrum.at_zero(), bdata.g_spectrum.at_zero()


def solve_nonlocal(fact: WaveFactorization, s: float, bdata: BoundaryData,
                   weight_mode: str = "modulus_sum", check_support: bool = True) -> NonlocalResult:
    """Nonlocal problem: ``u~ = A_+^-1 (A_+(xi_1, 0) g~(xi_1) + A_+(0, xi_2) f~(xi_2))``.

    Needs ``f~(0) = g~(0) = 0``; with that the three transformed conditions
    hold identically.  Spatial conditions and the homogeneous equation are
    measured and returned, not enforced.
    """
    n, _ = _split_index(fact.index, s)
    if n != 1:
        raise AdmissibilityError(
            f"nonlocal problem needs index - s = 1 + delta, got {fact.index - s:g}"
        )
    grid = fact.grid
    if bdata.grid != grid:
        raise PreconditionError("boundary data and factorization on different grids")
    f0, g0 = compatibility_defect(bdata)
    scale = max(np.abs(bdata.f_spectrum.values).max(), np.abs(bdata.g_spectrum.values).max(), 1e-300)
    if abs(f0) > COMPAT_TOL * scale or abs(g0) > COMPAT_TOL * scale:
        raise PreconditionError(
            f"incompatible nonlocal data: f~(0) = {f0:.3e}, g~(0) = {g0:.3e} (both must vanish)"
        )
    if check_support and bdata.half_line_leak() > SUPPORT_TOL:
        raise PreconditionError("nonlocal boundary data must live on the nonnegative half-line")

    ftil = bdata.f_spectrum.values
    gtil = bdata.g_spectrum.values
    plus = fact.plus
    c0 = plus.along_axis1() * gtil
    d0 = plus.along_axis2() * ftil
    total = (c0[:, None] + d0[None, :]) / plus.values
    u = dft_inverse(SpectrumFunction(grid, total))

    N = grid.N
    fscale = max(np.abs(ftil).max(), np.abs(gtil).max())
    t_err = max(
        np.abs(total[N, :] - ftil).max(),
        np.abs(total[:, N] - gtil).max(),
        abs(total[N, N]),
    ) / fscale if fscale > 0 else float(np.abs(total).max())

    h = grid.h
    half = half_line_mask(grid)
    row_sums = (u.values[half, :] * h).sum(axis=0)   # sum over x1 >= 0, function of x2
    col_sums = (u.values[:, half] * h).sum(axis=1)   # sum over x2 >= 0, function of x1
    total_sum = (u.values[np.ix_(half, half)] * h * h).sum()
    vscale = max(np.abs(bdata.f.values).max(), np.abs(bdata.g.values).max())
    s_err = max(
        np.abs(row_sums - bdata.f.values).max(),
        np.abs(col_sums - bdata.g.values).max(),
        abs(total_sum),
    )
    s_err = s_err / vscale if vscale > 0 else s_err

    au = apply_operator(fact.symbol, u)
    mask = quadrant_mask(grid, "open")
    uscale = np.abs(au.values).max()
    resid = float(np.abs(au.values[mask]).max() / uscale) if uscale > 0 else 0.0
    ext = exterior_mass(u, quadrant_mask(grid, "closed"))

    denom = norm_1d(bdata.f, s + 0.5, weight_mode) + norm_1d(bdata.g, s + 0.5, weight_mode)
    ratio = norm_hs(u, s, weight_mode) / denom if denom > 0 else 0.0
    return NonlocalResult(u, LineSpectrum(grid, c0), LineSpectrum(grid, d0), float(t_err),
                          float(s_err), resid, ext, float(ratio), (f0, g0))


# -- data helpers ----------------------------------------------------------------

def sample_half_line(func, grid: LatticeGrid, zero_mean: bool = False,
                     corrector=None) -> LineFunction:
    """Sample ``func`` at ``x >= 0`` (zero elsewhere).

    With ``zero_mean`` a multiple of the sampled ``corrector`` (default
    ``x^2 exp(-x^2)``) is subtracted so that ``sum f h = 0`` exactly.
    """
    x = grid.points
    vals = np.where(x >= 0, func(np.maximum(x, 0)), 0.0).astype(complex)
    if zero_mean:
        corrector = corrector or (lambda t: t ** 2 * np.exp(-t ** 2))
        cvals = np.where(x >= 0, corrector(np.maximum(x, 0)), 0.0)
        vals = vals - vals.sum() / cvals.sum() * cvals
    return LineFunction(grid, vals)


def random_quadrant_rhs(grid: LatticeGrid, seed: int, rate: float = 1.0,
                        conv="closed", physical: bool = False) -> GridFunction:
    """Seeded quadrant-supported right-hand side with exponential decay.

    ``rate`` is per lattice step, or per unit length when ``physical``.
    """
    rng = np.random.default_rng(seed)
    m1, m2 = grid.index_mesh()
    dist = (m1 + m2) * (grid.h if physical else 1.0)
    vals = (1.0 + 0.5 * rng.standard_normal(m1.shape)) * np.exp(-rate * np.abs(dist))
    return GridFunction(grid, np.where(quadrant_mask(grid, conv), vals, 0.0))


def _seeded_poly(rng, degree):
    return rng.standard_normal(degree + 1)


def smooth_half_line_data(grid: LatticeGrid, seed: int, width: float = 0.5,
                          degree: int = 2, zero_mean: bool = False) -> LineFunction:
    """Seeded ``p(x) exp(-x^2 / w^2)`` on ``x >= 0``, defined in physical units."""
    coef = _seeded_poly(np.random.default_rng(seed), degree)
    corrector = lambda t: t ** 2 * np.exp(-(t / width) ** 2)  # noqa: E731
    return sample_half_line(
        lambda t: np.polynomial.polynomial.polyval(t, coef) * np.exp(-(t / width) ** 2),
        grid, zero_mean=zero_mean, corrector=corrector,
    )


def smooth_layer_spectra(grid: LatticeGrid, n: int, seed: int, width: float = 0.5):
    """``n`` pairs of plus-type layer spectra ``(c_k, d_k)`` from smooth half-line data."""
    cs, ds = [], []
    for k in range(n):
        cs.append(dft1_forward(smooth_half_line_data(grid, 1000 * seed + 2 * k, width)))
        ds.append(dft1_forward(smooth_half_line_data(grid, 1000 * seed + 2 * k + 1, width)))
    return cs, ds


def smooth_quadrant_rhs(grid: LatticeGrid, seed: int, width: float = 0.5,
                        conv="closed") -> GridFunction:
    """Seeded ``p(x1, x2) exp(-|x|^2 / w^2)`` restricted to the quadrant, physical units."""
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal((3, 3))
    x1, x2 = grid.mesh()
    vals = np.polynomial.polynomial.polyval2d(x1, x2, coef) * np.exp(-(x1 ** 2 + x2 ** 2) / width ** 2)
    return GridFunction(grid, np.where(quadrant_mask(grid, conv), vals, 0.0))


def drift(values) -> float:
    """``max / min - 1`` of a positive sequence."""
    values = np.asarray(values, dtype=float)
    return float(values.max() / values.min() - 1.0)
