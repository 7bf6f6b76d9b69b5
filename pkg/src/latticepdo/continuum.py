"""Comparison of the lattice nonlocal problem with its continuous counterpart.

Continuous transforms use ``f~(xi) = int f(x) exp(-i x xi) dx``, which the
lattice transform ``h sum f(m h) exp(-i m h xi)`` approximates.  A
continuous plus factor extends analytically to ``Im xi < 0`` in each
variable (the transform side of functions supported in the quadrant).

The continuous solution is
``u~ = A_+^-1(xi) (A_+(xi_1, 0) g~(xi_1) + A_+(0, xi_2) f~(xi_2))``.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import hermite_e as He
from numpy.polynomial import polynomial as P
from scipy import integrate
from scipy.special import gamma

from .exceptions import NumericalError, PreconditionError
from .lattice import (
    GridFunction,
    LatticeGrid,
    LineFunction,
    LineSpectrum,
    SpectrumFunction,
    dft1_inverse,
    dft_forward,
    dft_inverse,
)
from .solvers import BoundaryData, solve_nonlocal
from .symbols import PeriodicSymbol, WaveFactorization

# Above this |xi| the half-line moments use their asymptotic series.
ASYMPTOTIC_SWITCH = 18.0
ASYMPTOTIC_TERMS = 40
MOMENT_CUTOFF = 7.5
MOMENT_NODES = 400


# -- continuous factors ---------------------------------------------------------

class ContinuousFactor:
    """Plus factor ``A_+(xi)`` on R^2 with declared order.

    Subclasses may provide ``inner_transform`` (the exact
    ``int exp(i x2 xi_2) / A_+(xi_1, xi_2) d xi_2``) and ``exact_solution``.
    """

    name = "factor"
    order = 0.0
    # |A_+^-1(xi)| <= C |xi|^-decay along the worst direction; drives the tail integral
    decay = 0.0

    def plus(self, xi1, xi2):
        raise NotImplementedError

    def minus(self, xi1, xi2):
        return np.ones(np.broadcast(xi1, xi2).shape, dtype=complex)

    def inner_transform(self, xi1, x2):
        return None

    def inner_transform_mirror(self, xi2, x1):
        """``int exp(i x1 xi_1) / A_+(xi_1, xi_2) d xi_1``, if known in closed form."""
        return None

    def exact_solution(self, f, g, x1, x2):
        return None


@dataclass(frozen=True)
class PowerFactor(ContinuousFactor):
    """``(c + i xi_1 + i xi_2)^p`` with ``c > 0``; of order ``p``, radially."""

    c: float = 2.0
    p: int = 2

    def __post_init__(self):
        if not self.c > 0 or int(self.p) != self.p or self.p < 1:
            raise PreconditionError("PowerFactor needs c > 0 and an integer power p >= 1")

    @property
    def name(self):
        return f"power({self.c:g},{self.p})"

    @property
    def order(self):
        return float(self.p)

    @property
    def decay(self):
        return float(self.p)

    def plus(self, xi1, xi2):
        return (self.c + 1j * np.asarray(xi1) + 1j * np.asarray(xi2)) ** self.p

    def inner_transform(self, xi1, x2):
        # transform pair: x^(p-1) e^(-a x) / (p-1)! on x > 0  <->  (a + i xi)^-p
        a = self.c + 1j * np.asarray(xi1)
        x2 = np.asarray(x2, dtype=float)
        val = 2 * np.pi * x2 ** (self.p - 1) * np.exp(-a * x2) / math.factorial(self.p - 1)
        return np.where(x2 > 0, val, 0.0)

    def inner_transform_mirror(self, xi2, x1):
        return self.inner_transform(xi2, x1)

    def exact_solution(self, f, g, x1, x2):
        """``x2^(p-1) e^(-c x2) / (p-1)! [(c + d)^p g](x1 - x2)`` plus the mirror term."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if np.any(x1 <= 0) or np.any(x2 <= 0):
            raise PreconditionError("closed form is evaluated in the open quadrant only")
        p, c = self.p, self.c
        fac = math.factorial(p - 1)

        def shifted(data, y):
            # (c + d/dy)^p data = sum_j C(p, j) c^(p-j) data^(j)
            return sum(math.comb(p, j) * c ** (p - j) * data.derivative(y, j) for j in range(p + 1))

        ug = x2 ** (p - 1) * np.exp(-c * x2) / fac * shifted(g, x1 - x2)
        uf = x1 ** (p - 1) * np.exp(-c * x1) / fac * shifted(f, x2 - x1)
        return ug + uf


@dataclass(frozen=True)
class SeparableFactor(ContinuousFactor):
    """``(a + i xi_1)(b + i xi_2)``; anisotropic growth, order 2 along the diagonal."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise PreconditionError("SeparableFactor needs a, b > 0")

    @property
    def name(self):
        return f"separable({self.a:g},{self.b:g})"

    order = 2.0
    decay = 1.0  # only first order along each axis

    def plus(self, xi1, xi2):
        return (self.a + 1j * np.asarray(xi1)) * (self.b + 1j * np.asarray(xi2))

    def inner_transform(self, xi1, x2):
        x2 = np.asarray(x2, dtype=float)
        val = 2 * np.pi * np.exp(-self.b * x2) / (self.a + 1j * np.asarray(xi1))
        return np.where(x2 > 0, val, 0.0)

    def inner_transform_mirror(self, xi2, x1):
        x1 = np.asarray(x1, dtype=float)
        val = 2 * np.pi * np.exp(-self.a * x1) / (self.b + 1j * np.asarray(xi2))
        return np.where(x1 > 0, val, 0.0)

    def exact_solution(self, f, g, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        return self.b * np.exp(-self.b * x2) * g(x1) + self.a * np.exp(-self.a * x1) * f(x2)


@dataclass(frozen=True)
class ConstantFactor(ContinuousFactor):
    value: complex = 1.0
    order = 0.0
    name = "constant"

    def plus(self, xi1, xi2):
        return np.full(np.broadcast(xi1, xi2).shape, self.value, dtype=complex)


def catalog_factor(expr: str) -> ContinuousFactor:
    """``power(c, p)``, ``separable(a, b)`` or ``constant(value)``."""
    try:
        node = ast.parse(expr.strip(), mode="eval").body
        if isinstance(node, ast.Name):
            name, args = node.id, []
        else:
            name = node.func.id
            args = [ast.literal_eval(a) for a in node.args]
    except (SyntaxError, AttributeError, ValueError):
        raise PreconditionError(f"cannot parse factor expression {expr!r}") from None
    table = {"power": PowerFactor, "separable": SeparableFactor, "constant": ConstantFactor}
    if name not in table:
        raise PreconditionError(f"unknown continuous factor {name!r}")
    try:
        return table[name](*args)
    except TypeError as exc:
        raise PreconditionError(f"bad arguments for {name}: {exc}") from None


# -- data ---------------------------------------------------------------------

def half_line_moments(xi, kmax: int) -> np.ndarray:
    """``J_k(xi) = int_0^inf y^k exp(-y^2 - i y xi) dy`` for ``k = 0..kmax``.

    Gauss-Legendre on ``[0, MOMENT_CUTOFF]`` for moderate ``|xi|`` and the
    integration-by-parts series beyond; the three-term recurrence loses
    digits to cancellation and is avoided.  Returns shape ``(kmax + 1,) + xi.shape``.
    """
    xi = np.asarray(xi, dtype=float)
    shape = xi.shape
    xi = xi.reshape(-1)
    out = np.zeros((kmax + 1, xi.size), dtype=complex)
    small = np.abs(xi) <= ASYMPTOTIC_SWITCH
    xs = xi[small]
    if xs.size:
        y, w = _moment_rule()
        phase = np.exp(-1j * np.outer(xs, y)) * (w * np.exp(-y * y))[None, :]
        for k in range(kmax + 1):
            out[k, small] = phase @ y ** k
    xl = xi[~small]
    if xl.size:
        # sum_m (-1)^m / m! (k + 2m)! / (i xi)^(k + 2m + 1)
        ixi = 1j * xl
        for k in range(kmax + 1):
            acc = np.zeros_like(ixi)
            for m in range(ASYMPTOTIC_TERMS):
                n = k + 2 * m
                acc += (-1) ** m / math.factorial(m) * math.factorial(n) / ixi ** (n + 1)
            out[k, ~small] = acc
    return out.reshape((kmax + 1,) + shape)


_RULE = {}


def _moment_rule():
    if "rule" not in _RULE:
        x, w = np.polynomial.legendre.leggauss(MOMENT_NODES)
        _RULE["rule"] = (0.5 * MOMENT_CUTOFF * (x + 1), 0.5 * MOMENT_CUTOFF * w)
    return _RULE["rule"]


@dataclass(frozen=True)
class GaussianData:
    """``Q(x / sigma) exp(-(x / sigma)^2)`` on the half-line ``x >= 0`` or on all of R.

    ``coeffs`` are the power-series coefficients of ``Q``.
    """

    coeffs: tuple
    sigma: float = 0.5
    half_line: bool = True

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.sigma > 0:
            raise PreconditionError("sigma must be positive")

    @classmethod
    def zero_mean(cls, coeffs, sigma=0.5, half_line=True):
        """Adjust the last coefficient so that ``int f = 0``."""
        coeffs = list(map(float, coeffs))
        k = len(coeffs) - 1
        m = _moments_at_zero(k, half_line)
        if m[k] == 0:
            raise PreconditionError("cannot enforce zero mean with an odd top power on R")
        coeffs[k] = -sum(c * mk for c, mk in zip(coeffs[:k], m[:k])) / m[k]
        return cls(tuple(coeffs), sigma, half_line)

    def _poly_derivative(self, order):
        """Coefficients ``R`` with ``d^order/dy^order [Q e^(-y^2)] = R(y) e^(-y^2)``."""
        q = np.array(self.coeffs, dtype=float)
        for _ in range(order):
            q = P.polysub(P.polyder(q), P.polymulx(2 * q)) if q.size > 1 else P.polymulx(-2 * q)
        return q

    def derivative(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        y = x / self.sigma
        vals = P.polyval(y, self._poly_derivative(order)) * np.exp(-y * y) / self.sigma ** order
        if self.half_line:
            vals = np.where(x >= 0, vals, 0.0)
        return vals

    def __call__(self, x):
        return self.derivative(x, 0)

    def transform(self, xi):
        """Continuous Fourier transform in closed form."""
        xi = np.asarray(xi, dtype=float)
        s = self.sigma
        k = len(self.coeffs) - 1
        t = s * xi
        if self.half_line:
            J = half_line_moments(t, k)
            val = sum(c * J[j] for j, c in enumerate(self.coeffs))
        else:
            # int y^j e^(-y^2 - i y t) dy = sqrt(pi) (-i r)^j He_j(r t) e^(-t^2/4), r = 2^-1/2
            r = 1 / np.sqrt(2)
            g = np.sqrt(np.pi) * np.exp(-t * t / 4)
            val = sum(c * (-1j * r) ** j * He.hermeval(r * t, [0] * j + [1]) for j, c in enumerate(self.coeffs)) * g
        return s * val

    def mean(self):
        return complex(self.transform(np.array(0.0)))


def _moments_at_zero(k, half_line):
    # int_0^inf y^j e^(-y^2) dy = Gamma((j+1)/2) / 2
    m = [gamma((j + 1) / 2) / 2 for j in range(k + 1)]
    if not half_line:
        m = [2 * mj if j % 2 == 0 else 0.0 for j, mj in enumerate(m)]
    return m


class ContinuousBoundaryData(NamedTuple):
    """Boundary data ``f`` (on the ``x2`` axis) and ``g`` (on the ``x1`` axis)."""

    f: GaussianData
    g: GaussianData

    def transforms(self, xi):
        return self.f.transform(xi), self.g.transform(xi)


def catalog_data(name: str = "halfline", sigma: float = 0.5) -> ContinuousBoundaryData:
    """Pair ``(f, g)`` of zero-mean catalog data.

    ``halfline``: ``y^4``-type profiles on ``x >= 0`` (transforms ~ ``xi^-5``).
    ``bandlimited``: odd Hermite-type profiles on R whose transforms are
    Gaussian, hence negligible outside the period once ``h`` is moderate.
    """
    if name == "halfline":
        return ContinuousBoundaryData(GaussianData.zero_mean((0, 0, 0, 0, 1.0, 0.3, 0.0), sigma),
                                      GaussianData.zero_mean((0, 0, 0, 0, 1.0, -0.5, 0.0), sigma))
    if name == "bandlimited":
        return ContinuousBoundaryData(GaussianData((0.0, 1.0), sigma, half_line=False),
                                      GaussianData((0.0, 0.5, 0.0, -1.0), sigma, half_line=False))
    raise PreconditionError(f"unknown data set {name!r}")


# -- lattice side ---------------------------------------------------------------

def lift_lh(data, grid: LatticeGrid):
    """``l_h``: restrict the continuous transform to one period, invert discretely.

    ``data`` is an object with a ``transform`` method (1-D) or a callable
    ``(xi1, xi2) -> spectrum`` (2-D).
    """
    if hasattr(data, "transform"):
        spec = np.asarray(data.transform(grid.frequencies), dtype=complex)
        if not np.all(np.isfinite(spec)):
            raise NumericalError("continuous transform returned non-finite values")
        return dft1_inverse(LineSpectrum(grid, spec))
    x1, x2 = grid.frequency_mesh()
    spec = np.asarray(data(x1, x2), dtype=complex)
    if not np.all(np.isfinite(spec)):
        raise NumericalError("continuous transform returned non-finite values")
    return dft_inverse(SpectrumFunction(grid, spec))


def restrict_symbol(cf: ContinuousFactor, grid: LatticeGrid):
    """Sample the continuous factors on the frequency nodes.

    Returns ``(factorization, leak)`` where ``leak`` is the relative kernel
    mass of the plus factor outside the quadrant (reported, not enforced).
    """
    x1, x2 = grid.frequency_mesh()
    plus_vals = np.asarray(cf.plus(x1, x2), dtype=complex)
    minus_vals = np.asarray(cf.minus(x1, x2), dtype=complex)
    if np.abs(plus_vals).min() == 0 or np.abs(minus_vals).min() == 0:
        raise PreconditionError(f"factor {cf.name} vanishes on the frequency nodes")
    plus = PeriodicSymbol(grid, plus_vals, cf.order, cf.name + "+")
    minus = PeriodicSymbol(grid, minus_vals, 0.0, cf.name + "-")
    fact = WaveFactorization(plus, minus, cf.order)
    return fact, fact.support_tolerance


def lattice_solution(cf: ContinuousFactor, f, g, grid: LatticeGrid, s: float = None):
    """Discrete nonlocal solution with lifted data and restricted factor."""
    fact, _ = restrict_symbol(cf, grid)
    s = cf.order - 1.0 if s is None else s
    bd = BoundaryData(lift_lh(f, grid), lift_lh(g, grid))
    return solve_nonlocal(fact, s, bd, check_support=False)


def continuous_spectrum(cf: ContinuousFactor, f, g, xi1, xi2):
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    zero = np.zeros_like
    num = cf.plus(xi1, zero(xi1)) * g.transform(xi1) + cf.plus(zero(xi2), xi2) * f.transform(xi2)
    return num / cf.plus(xi1, xi2)


# -- continuous solution ------------------------------------------------------

def _gauss_legendre(lo, hi, panels, order=16):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).reshape(-1)
    weights = (half[:, None] * w[None, :]).reshape(-1)
    return nodes, weights


def _inner_qawf(inv, outer, x):
    """``int exp(i x t) inv(a, t) dt`` for each ``a`` in ``outer``, by Fourier-weighted quadrature."""
    out = np.empty(np.shape(outer), dtype=complex)
    for i, a in enumerate(np.ravel(outer)):
        even = lambda t, a=a: inv(a, t) + inv(a, -t)  # noqa: E731
        odd = lambda t, a=a: inv(a, t) - inv(a, -t)  # noqa: E731
        parts = []
        for fn, wt in ((even, "cos"), (odd, "sin")):
            re = integrate.quad(lambda t: fn(t).real, 0, np.inf, weight=wt, wvar=x, limlst=200)[0]
            im = integrate.quad(lambda t: fn(t).imag, 0, np.inf, weight=wt, wvar=x, limlst=200)[0]
            parts.append(re + 1j * im)
        out.flat[i] = parts[0] + 1j * parts[1]
    return out


def _line_terms(cf, f, g, x1, x2, Lambda, panels):
    """Both layer terms at one point, outer Gauss-Legendre rule on ``[-Lambda, Lambda]``."""
    xi, w = _gauss_legendre(-Lambda, Lambda, panels)
    zero = np.zeros_like(xi)
    inner_g = cf.inner_transform(xi, x2)
    if inner_g is None:
        inner_g = _inner_qawf(lambda a, t: 1.0 / cf.plus(a, t), xi, x2)
    inner_f = cf.inner_transform_mirror(xi, x1)
    if inner_f is None:
        inner_f = _inner_qawf(lambda a, t: 1.0 / cf.plus(t, a), xi, x1)
    ug = np.sum(w * g.transform(xi) * cf.plus(xi, zero) * np.exp(1j * x1 * xi) * inner_g)
    uf = np.sum(w * f.transform(xi) * cf.plus(zero, xi) * np.exp(1j * x2 * xi) * inner_f)
    return (ug + uf) / (4 * np.pi ** 2)


@dataclass
class ContinuousEvaluation:
    values: np.ndarray
    Lambda: float
    richardson_gap: float


def continuous_solution(cf: ContinuousFactor, f, g, points, Lambda: float = 512.0,
                        panels_per_unit: float = 0.5, tol: float = 1e-6,
                        h: float = None) -> ContinuousEvaluation:
    """Continuous solution at ``points`` (array of ``(x1, x2)``) by quadrature.

    The outer integral runs over ``[-Lambda, Lambda]``; it is repeated with
    ``2 Lambda`` and twice the panels and the larger run is returned.  A gap
    above ``tol`` (relative to the largest value) raises.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if h is not None and Lambda < 4 * np.pi / h:
        raise PreconditionError(f"cutoff Lambda={Lambda:g} is below 4 pi / h = {4 * np.pi / h:g}")

    def run(lam):
        panels = max(16, int(np.ceil(2 * lam * panels_per_unit)))
        return np.array([_line_terms(cf, f, g, x1, x2, lam, panels) for x1, x2 in pts])

    coarse = run(Lambda)
    fine = run(2 * Lambda)
    scale = max(np.abs(fine).max(), 1e-300)
    gap = float(np.abs(fine - coarse).max() / scale)
    if gap > tol:
        raise NumericalError(f"continuous quadrature not converged: Richardson gap {gap:.2e} > {tol:g}")
    return ContinuousEvaluation(fine, 2 * Lambda, gap)


def exact_solution(cf: ContinuousFactor, f, g, points):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    vals = cf.exact_solution(f, g, pts[:, 0], pts[:, 1])
    if vals is None:
        raise PreconditionError(f"no closed form for {cf.name}")
    return np.asarray(vals, dtype=complex)


def box_integral(cf: ContinuousFactor, f, g, points, half_width: float,
                 panel_width: float = 1.0, order: int = 16) -> np.ndarray:
    """``(2 pi)^-2 int over [-w, w]^2 of u~(xi) exp(i x xi)`` by tensor Gauss-Legendre."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    panels = max(4, int(np.ceil(2 * half_width / panel_width)))
    xi, w = _gauss_legendre(-half_width, half_width, panels, order)
    zero = np.zeros_like(xi)
    gt = g.transform(xi) * cf.plus(xi, zero)
    ft = f.transform(xi) * cf.plus(zero, xi)
    out = np.zeros(len(pts), dtype=complex)
    chunk = max(1, 4_000_000 // xi.size)
    for start in range(0, xi.size, chunk):
        sl = slice(start, start + chunk)
        inv = 1.0 / cf.plus(xi[sl, None], xi[None, :])  # rows xi_1, columns xi_2
        num = gt[sl, None] + ft[None, :]
        dens = (w[sl, None] * w[None, :]) * num * inv
        for i, (x1, x2) in enumerate(pts):
            out[i] += np.exp(1j * x1 * xi[sl]) @ dens @ np.exp(1j * x2 * xi)
    return out / (4 * np.pi ** 2)


def tail_integral(cf: ContinuousFactor, f, g, points, h: float):
    """Signed tail ``u(x) - box(x)`` over ``R^2 \\ [-pi/h, pi/h]^2``."""
    return exact_solution(cf, f, g, points) - box_integral(cf, f, g, points, np.pi / h)


# -- convergence study ---------------------------------------------------------

DEFAULT_POINTS = tuple((a, b) for a in (0.25, 0.5, 1.0) for b in (0.25, 0.5, 1.0))


@dataclass
class StudyRow:
    h: float
    N: int
    Lambda: float
    sup_error: float
    tail_bound: float
    fitted_beta_so_far: float


@dataclass
class StudyResult:
    rows: list
    beta: float
    r_squared: float
    monotone: bool
    tail_ok: bool

    def errors(self):
        return np.array([r.sup_error for r in self.rows])


def fit_rate(hs, errs):
    """Least-squares slope of ``log E`` against ``log h`` and its ``R^2``."""
    x = np.log(np.asarray(hs, dtype=float))
    y = np.log(np.asarray(errs, dtype=float))
    if len(x) < 2:
        return float("nan"), float("nan")
    A = np.vstack([x, np.ones_like(x)]).T
    coef = np.linalg.lstsq(A, y, rcond=None)[0]
    beta = coef[0]
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float(((A @ coef - y) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(beta), r2


def is_monotone(errs, slack: float = 0.05) -> bool:
    """Non-increasing, allowing one step that grows by at most ``slack``."""
    bumps = 0
    for a, b in zip(errs[:-1], errs[1:]):
        if b > a:
            if b > a * (1 + slack):
                return False
            bumps += 1
    return bumps <= 1


def convergence_study(cf: ContinuousFactor, f, g, h_list, half_length: float = 8.0,
                      points=DEFAULT_POINTS, s: float = None, reference: str = "exact",
                      tail_factor: float = 4 * np.pi ** 2) -> StudyResult:
    """Sup error over ``points`` of discrete against continuous solutions, per ``h``.

    ``half_length`` fixes the physical window, so ``N = half_length / h``.
    ``reference`` is ``"exact"`` (closed form) or ``"quadrature"``.
    """
    hs = list(map(float, h_list))
    if any(b >= a for a, b in zip(hs[:-1], hs[1:])):
        raise PreconditionError("h_list must be strictly decreasing")
    pts = np.asarray(points, dtype=float)
    if reference == "exact":
        u_ref = exact_solution(cf, f, g, pts)
        lam = float("inf")
    else:
        ev = continuous_solution(cf, f, g, pts, Lambda=4 * np.pi / hs[-1])
        u_ref, lam = ev.values, ev.Lambda
    rows, errs = [], []
    tail_ok = True
    for h in hs:
        grid = LatticeGrid.from_window(h, half_length)
        res = lattice_solution(cf, f, g, grid, s)
        idx = np.rint(pts / h).astype(int)
        if np.any(np.abs(pts / h - idx) > 1e-9):
            raise PreconditionError(f"evaluation points are not lattice points for h={h:g}")
        ud = res.u.values[idx[:, 0] + grid.N, idx[:, 1] + grid.N]
        err = float(np.abs(ud - u_ref).max())
        tail = float(np.abs(tail_integral(cf, f, g, pts, h)).max()) if reference == "exact" else float("nan")
        if reference == "exact" and not err <= tail_factor * tail:
            tail_ok = False
        errs.append(err)
        beta, _ = fit_rate(hs[: len(errs)], errs)
        rows.append(StudyRow(h, grid.N, lam, err, tail, beta))
    beta, r2 = fit_rate(hs, errs)
    return StudyResult(rows, beta, r2, is_monotone(errs), tail_ok)


def band_limited_check(cf: ContinuousFactor, f, g, grid: LatticeGrid, s: float = None):
    """Exact-coincidence diagnostics for data whose transform lives inside the period.

    Returns ``(spectrum_gap, lift_gap)``: the max relative gap between the
    discrete and continuous solution spectra on the nodes, and between
    ``l_h f`` and samples of ``f`` (likewise ``g``) at lattice points.
    """
    res = lattice_solution(cf, f, g, grid, s)
    x1, x2 = grid.frequency_mesh()
    cont = continuous_spectrum(cf, f, g, x1, x2)
    disc = dft_forward(res.u).values
    spectrum_gap = float(np.abs(disc - cont).max() / np.abs(cont).max())
    gaps = []
    for d in (f, g):
        lifted = lift_lh(d, grid).values
        samples = d(grid.points)
        gaps.append(np.abs(lifted - samples).max() / np.abs(samples).max())
    return spectrum_gap, float(max(gaps))
