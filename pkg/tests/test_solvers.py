import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latticepdo.exceptions import AdmissibilityError, NumericalError, PreconditionError
from latticepdo.lattice import (
    GridFunction,
    LatticeGrid,
    LineFunction,
    dft1_forward,
    exterior_mass,
    quadrant_mask,
    restrict_quadrant,
)
from latticepdo.solvers import (
    BoundaryData,
    DigitalOperator,
    GeneralSolutionSpec,
    apply_operator,
    dirichlet_assemble,
    dirichlet_solve,
    drift,
    equation_residual,
    general_solution,
    random_quadrant_rhs,
    sample_half_line,
    smooth_exterior_tail,
    smooth_layer_spectra,
    smooth_quadrant_rhs,
    solve_nonlocal,
    solve_unique,
)
from latticepdo.symbols import (
    PeriodicSymbol,
    QnPolynomial,
    WaveFactorization,
    catalog_factorization,
)

seeds = st.integers(0, 10 ** 6)


@pytest.fixture(scope="module")
def split_case():
    g = LatticeGrid(0.125, 32)
    return g, catalog_factorization("exp_split(0,0.1,0.8)", g)


@pytest.fixture(scope="module")
def smooth_case():
    g = LatticeGrid.from_window(0.125, 4.0)
    return g, catalog_factorization("product(exp_smooth(0.5,0.5,0.25), plus(12,1))", g)


def rel(a, b):
    return np.abs(a - b).max() / np.abs(b).max()


def test_digital_operator_is_a_multiplier(split_case):
    g, fact = split_case
    u = random_quadrant_rhs(g, 1)
    op = DigitalOperator(fact.symbol)
    assert op.grid == g
    assert np.array_equal(op(u).values, apply_operator(fact.symbol, u).values)


@pytest.mark.parametrize("conv", ["closed", "open"])
@given(seed=seeds)
@settings(max_examples=5)
def test_manufactured_recovery(split_case, conv, seed):
    g, fact = split_case
    ustar = random_quadrant_rhs(g, seed, 1.0, conv)
    v = restrict_quadrant(apply_operator(fact.symbol, ustar), conv)
    u = solve_unique(fact, 0.0, v, conv)
    assert rel(u.values, ustar.values) <= 1e-8


def test_continuation_independence(split_case):
    g, fact = split_case
    v = random_quadrant_rhs(g, 3, 1.0)
    u1 = solve_unique(fact, 0.0, v)
    u2 = solve_unique(fact, 0.0, v, continuation=smooth_exterior_tail(g))
    mask = quadrant_mask(g)
    assert rel(u2.values[mask], u1.values[mask]) <= 1e-8
    assert exterior_mass(u1, mask) <= 1e-10
    assert equation_residual(fact.symbol, u1, v, "closed") <= 1e-8


def test_unique_solve_preconditions(split_case):
    g, fact = split_case
    v = random_quadrant_rhs(g, 0)
    with pytest.raises(AdmissibilityError):
        solve_unique(fact, 0.5, v)
    with pytest.raises(PreconditionError):
        solve_unique(fact, 0.0, GridFunction(g, np.ones((g.size, g.size))))
    with pytest.raises(PreconditionError):
        solve_unique(fact, 0.0, v, continuation=GridFunction(g, np.ones((g.size, g.size))))


def test_unique_solve_reports_wraparound():
    # plus(1,1) has a slowly decaying inverse; on a small window it wraps around
    g = LatticeGrid(0.125, 8)
    fact = catalog_factorization("plus(1,1)", g)
    with pytest.raises(NumericalError):
        solve_unique(fact, 0.8, random_quadrant_rhs(g, 0))


def _general(g, n, seed, stencil="multiplier", c=6.0):
    fact = catalog_factorization(f"plus({c},{n})", g)
    v = smooth_quadrant_rhs(g, 1, 1.0)
    cs, ds = smooth_layer_spectra(g, n, seed, 1.0)
    spec = GeneralSolutionSpec(n, QnPolynomial(g, n, c), cs, ds, stencil=stencil)
    return fact, v, general_solution(fact, fact.index - n, v, spec)


def test_general_solution_first_order():
    g = LatticeGrid.from_window(0.125, 8.0)
    fact, v, u = _general(g, 1, 0)
    _, _, w = _general(g, 1, 1)
    assert equation_residual(fact.symbol, u, v, "open") <= 1e-8
    assert exterior_mass(u, quadrant_mask(g)) <= 1e-10
    assert rel(u.values, w.values) > 1e-3


def test_general_solution_second_order_stencils():
    g = LatticeGrid.from_window(0.125, 8.0)
    fact, v, u = _general(g, 2, 0, "multiplier")
    # support is kept but the equation fails on the strips next to the axes
    assert exterior_mass(u, quadrant_mask(g)) <= 1e-10
    assert equation_residual(fact.symbol, u, v, "open") > 1e-2
    fact, v, u = _general(g, 2, 0, "forward")
    assert equation_residual(fact.symbol, u, v, "open") <= 1e-8
    assert exterior_mass(u, quadrant_mask(g)) > 1e-2


def test_general_solution_preconditions(grid8):
    fact = catalog_factorization("plus(6,1)", grid8)
    v = GridFunction.zeros(grid8)
    spec = GeneralSolutionSpec(2, QnPolynomial(grid8, 2, 6.0))
    with pytest.raises(AdmissibilityError):
        general_solution(fact, 0.0, v, spec)
    with pytest.raises(PreconditionError):
        GeneralSolutionSpec(0, QnPolynomial(grid8, 0))
    with pytest.raises(PreconditionError):
        GeneralSolutionSpec(1, QnPolynomial(grid8, 1), stencil="central")
    with pytest.raises(PreconditionError):
        GeneralSolutionSpec(2, QnPolynomial(grid8, 2), [np.zeros(grid8.size)])
    assert spec.layer_classes(1.0, 3.0) == [-1.5, -0.5]


def _dirichlet_data(g, width=0.5):
    x = np.maximum(g.points, 0)
    on = g.points >= 0
    f = LineFunction(g, np.where(on, (1 + x) * np.exp(-(x / width) ** 2), 0))
    g_ = LineFunction(g, np.where(on, (1 - 2 * x) * np.exp(-(x / width) ** 2), 0))
    return BoundaryData(f, g_)


def test_dirichlet_reproduces_traces(smooth_case):
    g, fact = smooth_case
    system = dirichlet_assemble(fact, _dirichlet_data(g), 0.0)
    sol = dirichlet_solve(system)
    assert sol.system_residual <= 1e-10
    assert sol.trace_error <= 1e-6
    assert system.cond < 1e3
    # the gauge row pins the constant shared by c0 and d0
    assert abs(sol.c0.values.sum()) <= 1e-10 * np.abs(sol.c0.values).max()


def test_dirichlet_oversampling_agrees(smooth_case):
    g, fact = smooth_case
    bd = _dirichlet_data(g)
    a = dirichlet_solve(dirichlet_assemble(fact, bd, oversample=1)).u.values
    b = dirichlet_solve(dirichlet_assemble(fact, bd, oversample=2)).u.values
    assert rel(a, b) <= 1e-8


def test_dirichlet_detects_singular_symbol(smooth_case):
    g, _ = smooth_case
    shift = np.exp(1j * g.h * g.frequencies)[:, None] * np.ones(g.size)[None, :]
    one = PeriodicSymbol.identity(g)
    bad = WaveFactorization(PeriodicSymbol(g, shift), one, 0.0)
    with pytest.raises(NumericalError):
        dirichlet_assemble(bad, _dirichlet_data(g))


def test_dirichlet_corner_and_index_checks(smooth_case):
    g, fact = smooth_case
    bd = _dirichlet_data(g)
    shifted = BoundaryData(bd.f + LineFunction(g, np.where(g.points >= 0, 0.5, 0.0) * np.exp(-g.points ** 2)), bd.g)
    with pytest.raises(PreconditionError):
        dirichlet_solve(dirichlet_assemble(fact, shifted))
    with pytest.raises(AdmissibilityError):
        dirichlet_assemble(fact, bd, s=1.0)


def _nonlocal_data(g, zero_mean=True):
    corr = lambda t: t ** 2 * np.exp(-4 * t ** 2)  # noqa: E731
    f = sample_half_line(lambda t: np.exp(-4 * t ** 2) * (1 + t), g, zero_mean, corr)
    g_ = sample_half_line(lambda t: np.exp(-6 * t ** 2) * (1 - t + t ** 2), g, zero_mean, corr)
    return BoundaryData(f, g_)


def test_nonlocal_conditions(smooth_case):
    g, fact = smooth_case
    r = solve_nonlocal(fact, 0.0, _nonlocal_data(g))
    assert r.transformed_error <= 1e-12
    assert r.spatial_error <= 1e-8
    assert r.residual <= 1e-8
    assert r.exterior <= 1e-10
    assert r.apriori_ratio > 0
    # the general first-order solution with the same layers is the same function
    spec = GeneralSolutionSpec(1, QnPolynomial(g, 1), [r.c0], [r.d0])
    u2 = general_solution(fact, 0.0, GridFunction.zeros(g), spec)
    assert rel(u2.values, r.u.values) <= 1e-12


def test_nonlocal_rejects_incompatible_data(smooth_case):
    g, fact = smooth_case
    with pytest.raises(PreconditionError, match="incompatible"):
        solve_nonlocal(fact, 0.0, _nonlocal_data(g, zero_mean=False))


def test_sample_half_line_zero_mean(grid8):
    f = sample_half_line(lambda t: np.exp(-t), grid8, zero_mean=True)
    assert abs(dft1_forward(f).at_zero()) <= 1e-14
    assert not f.values[grid8.points < 0].any()


def test_drift():
    assert drift([1.0, 1.1, 1.05]) == pytest.approx(0.1)
    assert drift([2.0]) == 0.0
