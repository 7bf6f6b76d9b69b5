"""Periodic symbols, wave factorizations and their certificates.

A factorization ``A = A_plus * A_minus`` is certified on the grid by
one-sided spectral support: the inverse transform of ``A_plus`` must live in
the closed quadrant and that of ``A_minus`` in its reflection.  This is the
lattice counterpart of analytic continuation into the tube domains.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import PreconditionError
from .lattice import (
    GridFunction,
    LatticeGrid,
    QuadrantConvention,
    SpectrumFunction,
    dft_forward,
    dft_inverse,
    quadrant_mask,
    zeta,
)
from .sobolev import sobolev_weight

# Largest real part allowed before exponentiating a split spectrum.
EXP_OVERFLOW_GUARD = 300.0
# Relative modulus on the outermost ring tolerated for exp-split input data.
EXP_DECAY_TOL = 1e-10


@dataclass(frozen=True)
class PeriodicSymbol:
    grid: LatticeGrid
    values: np.ndarray = field(repr=False)
    order: float = 0.0
    name: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.size, self.grid.size):
            raise PreconditionError(f"symbol shape {vals.shape} does not match grid")
        object.__setattr__(self, "values", vals)

    @property
    def ellipticity_floor(self) -> float:
        return float(np.abs(self.values).min())

    def inverse(self) -> "PeriodicSymbol":
        if self.ellipticity_floor == 0:
            raise PreconditionError(f"symbol {self.name!r} vanishes on the grid")
        return PeriodicSymbol(self.grid, 1.0 / self.values, -self.order, f"inv({self.name})")

    def kernel(self) -> GridFunction:
        """Inverse transform of the symbol (convolution kernel, weight ``h^2``)."""
        return dft_inverse(SpectrumFunction(self.grid, self.values))

    def along_axis1(self) -> np.ndarray:
        """Values ``A(xi_1, 0)``."""
        return self.values[:, self.grid.N]

    def along_axis2(self) -> np.ndarray:
        """Values ``A(0, xi_2)``."""
        return self.values[self.grid.N, :]

    @classmethod
    def identity(cls, grid: LatticeGrid) -> "PeriodicSymbol":
        return cls(grid, np.ones((grid.size, grid.size)), 0.0, "identity")


@dataclass(frozen=True)
class WaveFactorization:
    plus: PeriodicSymbol
    minus: PeriodicSymbol
    index: float
    support_tolerance: float = None

    def __post_init__(self):
        if self.plus.grid != self.minus.grid:
            raise PreconditionError("factors live on different grids")
        if self.support_tolerance is None:
            tol = max(verify_plus_type(self.plus, "plus"), verify_plus_type(self.minus, "minus"))
            object.__setattr__(self, "support_tolerance", tol)

    @property
    def grid(self) -> LatticeGrid:
        return self.plus.grid

    @property
    def symbol(self) -> PeriodicSymbol:
        return compose_symbol([self.plus, self.minus])

    @property
    def order(self) -> float:
        return self.plus.order + self.minus.order

    def reconstruction_error(self, target: PeriodicSymbol) -> float:
        prod = self.plus.values * self.minus.values
        return float(np.abs(prod - target.values).max() / np.abs(target.values).max())


@dataclass(frozen=True)
class QnPolynomial:
    """``(c - zeta_1 - zeta_2)^n`` on the frequency nodes."""

    grid: LatticeGrid
    n: int
    c: float = 1.0

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise PreconditionError("Q_n degree must be a nonnegative integer")
        if not self.c > 0:
            raise PreconditionError("Q_n constant must be positive")

    @property
    def values(self) -> np.ndarray:
        return elementary_plus_factor(self.grid, self.c, self.n).values

    def as_symbol(self) -> PeriodicSymbol:
        return PeriodicSymbol(self.grid, self.values, float(self.n), f"Q({self.c},{self.n})")


def _support_tolerance(sym: PeriodicSymbol, side: int) -> float:
    k = np.abs(sym.kernel().values)
    peak = k.max()
    if peak == 0:
        return 0.0
    outside = k[~quadrant_mask(sym.grid, "closed", side)]
    return float(outside.max() / peak)


def verify_plus_type(sym: PeriodicSymbol, side: str = "plus") -> float:
    """Largest kernel modulus outside the closed (reflected) quadrant, relative to the peak."""
    if side not in ("plus", "minus"):
        raise PreconditionError("side must be 'plus' or 'minus'")
    return _support_tolerance(sym, 1 if side == "plus" else -1)


def elementary_plus_factor(grid: LatticeGrid, c: float, power: int) -> PeriodicSymbol:
    """``(c - zeta_1 - zeta_2)^power``; its kernel sits on nonnegative shifts."""
    if not c > 0:
        raise PreconditionError("c must be positive")
    z = zeta(grid, -1)
    base = c - z[:, None] - z[None, :]
    return PeriodicSymbol(grid, base ** int(power), float(power), f"plus({c:g},{power})")


def elementary_minus_factor(grid: LatticeGrid, c: float, power: int) -> PeriodicSymbol:
    """Reflection of :func:`elementary_plus_factor`, built from ``exp(+i h xi)``."""
    if not c > 0:
        raise PreconditionError("c must be positive")
    z = zeta(grid, +1)
    base = c - z[:, None] - z[None, :]
    return PeriodicSymbol(grid, base ** int(power), float(power), f"minus({c:g},{power})")


def compose_symbol(parts) -> PeriodicSymbol:
    parts = list(parts)
    if not parts:
        raise PreconditionError("compose_symbol needs at least one part")
    grid = parts[0].grid
    vals = np.ones((grid.size, grid.size), dtype=complex)
    order = 0.0
    for p in parts:
        if p.grid != grid:
            raise PreconditionError("cannot compose symbols on different grids")
        vals = vals * p.values
        order += p.order
    return PeriodicSymbol(grid, vals, order, "*".join(p.name or "?" for p in parts))


def compose_factorizations(parts) -> WaveFactorization:
    """Multiply factorizations: plus factors together, minus factors together."""
    parts = list(parts)
    return WaveFactorization(
        compose_symbol([p.plus for p in parts]),
        compose_symbol([p.minus for p in parts]),
        float(sum(p.index for p in parts)),
    )


def certify_order(sym: PeriodicSymbol, weight_mode: str = "modulus_sum", order: float = None):
    """Measured ``(c1, c2)`` with ``c1 W^(a/2) <= |A| <= c2 W^(a/2)`` on the nodes."""
    alpha = sym.order if order is None else order
    ratio = np.abs(sym.values) * sobolev_weight(sym.grid, weight_mode) ** (-alpha / 2)
    return float(ratio.min()), float(ratio.max())


def split_two_quadrants(f: GridFunction, conv="closed"):
    """Split ``f`` supported in ``K u (-K)`` into its two quadrant parts.

    Under the closed convention the origin goes to the plus part.
    """
    conv = QuadrantConvention.coerce(conv)
    plus_mask = quadrant_mask(f.grid, conv, 1)
    minus_mask = quadrant_mask(f.grid, "open", -1)
    if conv is QuadrantConvention.CLOSED:
        minus_mask = minus_mask | (quadrant_mask(f.grid, "closed", -1) & ~plus_mask)
    stray = np.abs(f.values[~(plus_mask | minus_mask)])
    if stray.size and stray.max() > 0:
        raise PreconditionError(
            f"exp-split input has support outside the two quadrants (max {stray.max():.3e})"
        )
    return (
        GridFunction(f.grid, np.where(plus_mask, f.values, 0)),
        GridFunction(f.grid, np.where(minus_mask, f.values, 0)),
    )


def exp_split_factorize(f: GridFunction, conv="closed") -> WaveFactorization:
    """Index-zero factorization of ``exp(f~)`` for ``f`` supported in two opposite quadrants."""
    if f.edge_decay() > EXP_DECAY_TOL:
        raise PreconditionError(
            f"exp-split input reaches the window edge (ring/peak = {f.edge_decay():.2e})"
        )
    fp, fm = split_two_quadrants(f, conv)
    sp, sm = dft_forward(fp).values, dft_forward(fm).values
    worst = max(sp.real.max(), sm.real.max())
    if worst > EXP_OVERFLOW_GUARD:
        raise PreconditionError(
            f"exp-split spectrum has real part {worst:.1f} > {EXP_OVERFLOW_GUARD}; "
            f"scale f down by at least {worst / EXP_OVERFLOW_GUARD:.1f}"
        )
    grid = f.grid
    return WaveFactorization(
        PeriodicSymbol(grid, np.exp(sp), 0.0, "exp_split+"),
        PeriodicSymbol(grid, np.exp(sm), 0.0, "exp_split-"),
        0.0,
    )


def identity_factorization(grid: LatticeGrid) -> WaveFactorization:
    one = PeriodicSymbol.identity(grid)
    return WaveFactorization(one, one, 0.0, 0.0)


def random_two_quadrant(grid: LatticeGrid, seed: int, scale: float = 0.1,
                        width: float = 2.0, conv="closed") -> GridFunction:
    """Seeded random ``f`` on ``K u (-K)`` with a Gaussian envelope in index units.

    Values carry an ``h^-2`` factor so that the spectrum, as a function of
    ``h xi``, does not depend on ``h``.
    """
    rng = np.random.default_rng(seed)
    m1, m2 = grid.index_mesh()
    env = np.exp(-(m1 ** 2 + m2 ** 2) / (2 * width ** 2))
    vals = scale * rng.standard_normal(m1.shape) * env / grid.h ** 2
    conv = QuadrantConvention.coerce(conv)
    keep = quadrant_mask(grid, conv, 1) | quadrant_mask(grid, "open", -1)
    if conv is QuadrantConvention.CLOSED:
        keep |= quadrant_mask(grid, "closed", -1)
    return GridFunction(grid, np.where(keep, vals, 0.0))


def smooth_two_quadrant(grid: LatticeGrid, a_plus: float = 0.5, a_minus: float = 0.5,
                        width: float = 0.5) -> GridFunction:
    """``a x1 x2 exp(-|x|^2 / w^2) / w^4`` on each quadrant, sampled at lattice points.

    Defined in physical units, so its spectrum converges as ``h -> 0``.
    """
    x1, x2 = grid.mesh()
    bump = x1 * x2 * np.exp(-(x1 ** 2 + x2 ** 2) / width ** 2) / width ** 4
    vals = np.where((x1 > 0) & (x2 > 0), a_plus * bump, 0.0)
    vals = vals + np.where((x1 < 0) & (x2 < 0), a_minus * bump, 0.0)
    return GridFunction(grid, vals)


# -- catalog ---------------------------------------------------------------

def _catalog_call(node, grid, conv):
    if isinstance(node, ast.Name):
        name, args, kwargs = node.id, [], {}
    elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
        name = node.func.id
        args = list(node.args)
        kwargs = {k.arg: k.value for k in node.keywords}
    else:
        raise PreconditionError(f"cannot parse symbol expression {ast.dump(node)}")

    if name == "product":
        if kwargs:
            raise PreconditionError("product() takes positional parts only")
        return compose_factorizations(_catalog_call(a, grid, conv) for a in args)

    def lit(x):
        return ast.literal_eval(x)

    a = [lit(x) for x in args]
    kw = {k: lit(v) for k, v in kwargs.items()}
    try:
        if name == "identity":
            return identity_factorization(grid)
        if name == "exp_split":
            return exp_split_factorize(random_two_quadrant(grid, *a, conv=conv, **kw), conv)
        if name == "exp_smooth":
            return exp_split_factorize(smooth_two_quadrant(grid, *a, **kw), conv)
        if name == "plus":
            one = PeriodicSymbol.identity(grid)
            p = elementary_plus_factor(grid, *a, **kw)
            return WaveFactorization(p, one, p.order)
        if name == "minus":
            one = PeriodicSymbol.identity(grid)
            m = elementary_minus_factor(grid, *a, **kw)
            return WaveFactorization(one, m, 0.0)
    except TypeError as exc:
        raise PreconditionError(f"bad arguments for {name}: {exc}") from None
    raise PreconditionError(f"unknown catalog symbol {name!r}")


CATALOG_SYMBOLS = ("identity", "exp_split", "exp_smooth", "plus", "minus", "product")


def catalog_names(expr: str) -> list:
    """Names called in a catalog expression, without building anything."""
    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError:
        raise PreconditionError(f"cannot parse symbol expression {expr!r}") from None
    names = []
    for node in ast.walk(tree):
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name):
                raise PreconditionError(f"cannot parse symbol expression {expr!r}")
            names.append(node.func.id)
    if isinstance(tree.body, ast.Name):
        names.append(tree.body.id)
    return names


def catalog_factorization(expr: str, grid: LatticeGrid, conv="closed") -> WaveFactorization:
    """Build a factorization from a catalog expression.

    Names: ``identity``, ``exp_split(seed, scale)``, ``exp_smooth(a_plus, a_minus, width)``,
    ``plus(c, m)``, ``minus(c, m)``, ``product(...)``.
    """
    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError:
        raise PreconditionError(f"cannot parse symbol expression {expr!r}") from None
    return _catalog_call(tree.body, grid, conv)


def with_name(sym: PeriodicSymbol, name: str) -> PeriodicSymbol:
    return replace(sym, name=name)
