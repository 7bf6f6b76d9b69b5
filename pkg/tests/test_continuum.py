import numpy as np
import pytest
from hypothesis import given, strategies as st

from latticepdo import continuum as C
from latticepdo.exceptions import PreconditionError
from latticepdo.lattice import LatticeGrid

# int_0^inf y^k exp(-y^2 - i y xi) dy, 40-digit quadrature
MOMENTS = {
    0.0: {0: 0.886226925452758, 1: 0.5, 3: 0.5},
    3.0: {0: 0.09340763072856585 - 0.4282490710853986j,
          1: -0.14237360662809795 - 0.14011144609284876j,
          3: -0.14321979502892654 + 0.10508358456963658j},
    25.0: {0: -0.040129248914351476j, 1: -0.001615611429393414, 3: 1.586869863080566e-05},
}


@pytest.mark.parametrize("xi", sorted(MOMENTS))
def test_half_line_moments_frozen(xi):
    J = C.half_line_moments(np.array([xi]), 3)[:, 0]
    for k, ref in MOMENTS[xi].items():
        assert abs(J[k] - ref) <= 1e-12


def test_moments_continuous_across_switch():
    eps = 1e-11  # the slope of J_0 is ~3e-3 here
    a = C.half_line_moments(np.array([C.ASYMPTOTIC_SWITCH - eps]), 5)[:, 0]
    b = C.half_line_moments(np.array([C.ASYMPTOTIC_SWITCH + eps]), 5)[:, 0]
    assert np.abs(a - b).max() <= 2e-13


def test_moments_scalar_input():
    assert C.half_line_moments(0.0, 2).shape == (3,)


@pytest.mark.parametrize("half_line", [True, False])
def test_gaussian_transform_matches_quadrature(half_line):
    d = C.GaussianData((1.0, 0.3, -0.2), 0.5, half_line)
    x = np.linspace(-8, 8, 200001)
    dx = x[1] - x[0]
    for xi in (0.0, 1.7, 9.0):
        ref = np.sum(d(x) * np.exp(-1j * x * xi)) * dx
        assert abs(d.transform(np.array(xi)) - ref) <= 1e-4


def test_zero_mean_and_derivative():
    d = C.GaussianData.zero_mean((0, 0, 0, 0, 1, 0.3, 0), 0.5)
    assert abs(d.mean()) <= 1e-14
    x = np.array([0.2, 0.7, 1.3])
    step = 1e-5
    fd = (d(x + step) - d(x - step)) / (2 * step)
    assert np.allclose(d.derivative(x, 1), fd, rtol=1e-6)
    with pytest.raises(PreconditionError):
        C.GaussianData.zero_mean((0, 1), 0.5, half_line=False)
    with pytest.raises(PreconditionError):
        C.GaussianData((1,), 0.0)


def test_catalog():
    assert isinstance(C.catalog_factor("power(2,2)"), C.PowerFactor)
    assert isinstance(C.catalog_factor("separable(1,2)"), C.SeparableFactor)
    assert isinstance(C.catalog_factor("constant(1)"), C.ConstantFactor)
    with pytest.raises(PreconditionError):
        C.catalog_factor("cosine(1)")
    f, g = C.catalog_data("halfline")
    assert abs(f.mean()) <= 1e-14 and abs(g.mean()) <= 1e-14
    with pytest.raises(PreconditionError):
        C.catalog_data("uniform")


def test_boundary_data_pair():
    d = C.catalog_data("bandlimited")
    assert isinstance(d, C.ContinuousBoundaryData)
    ft, gt = d.transforms(np.array([0.0, 2.0]))
    assert np.allclose(ft, d.f.transform(np.array([0.0, 2.0])))
    assert np.allclose(gt, d.g.transform(np.array([0.0, 2.0])))


def test_declared_decay():
    assert C.catalog_factor("power(2,3)").decay == 3.0
    assert C.catalog_factor("separable(1,2)").decay == 1.0
    assert C.catalog_factor("constant(1)").decay == 0.0


def test_plus_factors_are_analytic_in_lower_half_planes():
    cf = C.PowerFactor(2.0, 2)
    # no zeros for Im xi <= 0 and at least one root in the upper half plane
    xi = np.linspace(-5, 5, 11)
    assert np.abs(cf.plus(xi - 1j, xi * 0 - 0.5j)).min() > 0
    root = 2j  # c + i xi1 + i xi2 = 0 at xi1 + xi2 = 2i
    assert abs(cf.plus(np.array(root), np.array(0.0))) < 1e-12


def test_separable_quadrature_matches_closed_form():
    cf = C.catalog_factor("separable(1,2)")
    f, g = C.catalog_data("halfline", 0.5)
    pts = [(0.5, 0.5), (0.25, 1.0)]
    ev = C.continuous_solution(cf, f, g, pts, Lambda=256, tol=1e-6)
    ex = C.exact_solution(cf, f, g, pts)
    assert np.abs(ev.values - ex).max() <= 1e-8 * np.abs(ex).max()
    with pytest.raises(PreconditionError):
        C.continuous_solution(cf, f, g, pts, Lambda=10, h=0.125)


def test_band_limited_data_coincides():
    cf = C.catalog_factor("power(2,2)")
    f, g = C.catalog_data("bandlimited", 0.4)
    gap_s, gap_l = C.band_limited_check(cf, f, g, LatticeGrid.from_window(0.0625, 8.0))
    assert gap_s <= 1e-8 and gap_l <= 1e-8


def test_lifting_reproduces_band_limited_samples():
    f, _ = C.catalog_data("bandlimited", 0.4)
    grid = LatticeGrid.from_window(0.0625, 8.0)
    lifted = C.lift_lh(f, grid)
    assert np.abs(lifted.values - f(grid.points)).max() <= 1e-12


@given(st.floats(0.5, 4.0), st.floats(1e-3, 10.0))
def test_fit_rate_recovers_power_law(beta, const):
    hs = 2.0 ** -np.arange(3, 7)
    b, r2 = C.fit_rate(hs, const * hs ** beta)
    assert b == pytest.approx(beta, rel=1e-10) and r2 == pytest.approx(1.0)


def test_is_monotone_slack():
    assert C.is_monotone([1.0, 0.5, 0.51])
    assert not C.is_monotone([1.0, 0.5, 0.6])


def test_convergence_study_frozen():
    cf = C.catalog_factor("power(2,2)")
    f, g = C.catalog_data("halfline", 0.5)
    res = C.convergence_study(cf, f, g, [0.125, 0.0625], 8.0)
    errs = [r.sup_error for r in res.rows]
    assert errs == pytest.approx([0.011195257147281949, 0.0013911812794635903], rel=1e-8)
    assert res.monotone and res.tail_ok
    assert res.beta == pytest.approx(3.0085, abs=1e-3)


def test_separable_factor_error_is_first_order():
    cf = C.catalog_factor("separable(1,2)")
    f, g = C.catalog_data("halfline", 0.5)
    res = C.convergence_study(cf, f, g, [0.125, 0.0625], 8.0)
    errs = [r.sup_error for r in res.rows]
    assert errs == pytest.approx([0.015847823968975515, 0.008039574332354756], rel=1e-8)
    # E(h) / h creeps up as h shrinks, so the fitted slope sits just under 1
    assert errs[1] / 0.0625 > errs[0] / 0.125
    assert 0.97 < res.beta < 1.0
