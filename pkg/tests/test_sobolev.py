import numpy as np
import pytest
from hypothesis import given, strategies as st

from latticepdo.exceptions import PreconditionError
from latticepdo.lattice import LatticeGrid, LineFunction, dft1_forward, divided_difference, restrict_quadrant
from latticepdo.sobolev import (
    SobolevParams,
    SobolevWeight,
    norm_1d,
    norm_hs,
    norm_hs_plus,
    sobolev_weight,
    sobolev_weight_1d,
)

from conftest import random_grid_function

exps = st.floats(-2.0, 2.0, allow_nan=False)
seeds = st.integers(0, 10 ** 6)


def l2(u):
    return np.sqrt((np.abs(u.values) ** 2).sum()) * u.grid.h


def test_s_zero_is_scaled_l2(grid8):
    u = random_grid_function(grid8, 0)
    assert np.isclose(norm_hs(u, 0.0), 2 * np.pi * l2(u), rtol=1e-13)


def test_s_one_matches_difference_quotients(grid8):
    u = random_grid_function(grid8, 1)
    d1 = divided_difference(u, 1)
    d2 = divided_difference(u, 2)
    expect = np.sqrt(l2(u) ** 2 + l2(d1) ** 2 + l2(d2) ** 2) * 2 * np.pi
    assert np.isclose(norm_hs(u, 1.0, "modulus_sum"), expect, rtol=1e-12)


def test_weights_at_least_one(grid8):
    for mode in ("modulus_sum", "paper_literal"):
        assert sobolev_weight(grid8, mode).min() >= 1.0
        assert sobolev_weight_1d(grid8, mode).min() >= 1.0
    # the literal weight can only be smaller
    assert (sobolev_weight(grid8, "paper_literal") <= sobolev_weight(grid8, "modulus_sum") + 1e-12).all()


def test_literal_weight_cancels_where_squares_do():
    g = LatticeGrid(0.25, 4)
    # at h xi = pi/2, zeta(xi)^2 + zeta(-xi)^2 = 2 Re zeta^2 = 0
    i, j = g.position(g.N // 2), g.position(-g.N // 2)
    assert np.isclose(sobolev_weight(g, "paper_literal")[i, j], 1.0, atol=1e-12)
    assert np.isclose(sobolev_weight(g, "modulus_sum")[i, j], 1.0 + 2 * 2 / g.h ** 2)


@given(seeds, exps, exps)
def test_monotone_in_s(seed, a, b):
    g = LatticeGrid(0.25, 4)
    u = random_grid_function(g, seed)
    lo, hi = sorted((a, b))
    assert norm_hs(u, lo) <= norm_hs(u, hi) * (1 + 1e-12)


@given(seeds, exps)
def test_triangle_and_homogeneity(seed, s):
    g = LatticeGrid(0.25, 4)
    u = random_grid_function(g, seed)
    v = random_grid_function(g, seed + 1)
    assert norm_hs(u + v, s) <= (norm_hs(u, s) + norm_hs(v, s)) * (1 + 1e-12)
    assert np.isclose(norm_hs(u * 3.0, s), 3.0 * norm_hs(u, s), rtol=1e-12)


def test_plus_norm_requires_quadrant_support(grid8):
    u = random_grid_function(grid8, 4)
    with pytest.raises(PreconditionError):
        norm_hs_plus(u, 0.0)
    r = restrict_quadrant(u)
    assert norm_hs_plus(r, 0.5) == norm_hs(r, 0.5)


def test_norm_1d_accepts_function_or_spectrum(grid8):
    rng = np.random.default_rng(0)
    f = LineFunction(grid8, rng.standard_normal(grid8.size))
    assert norm_1d(f, 0.5) == norm_1d(dft1_forward(f), 0.5)
    expect = np.sqrt((np.abs(f.values) ** 2).sum() * grid8.h * 2 * np.pi)
    assert np.isclose(norm_1d(f, 0.0), expect, rtol=1e-13)
    with pytest.raises(PreconditionError):
        norm_1d(np.zeros(4), 0.0)


def test_params_validation():
    with pytest.raises(PreconditionError):
        SobolevParams(1.0, "euclid")
    with pytest.raises(PreconditionError):
        SobolevParams(float("nan"))


@pytest.mark.parametrize("k", range(3, 8))
def test_modulus_sum_comparable_to_continuous_weight(k):
    g = LatticeGrid(2.0 ** -k, 16)
    xi = g.frequencies
    nz = xi != 0
    ratio = (sobolev_weight_1d(g)[nz] - 1.0) / xi[nz] ** 2
    assert ratio.min() >= 4 / np.pi ** 2 - 1e-12
    assert ratio.max() <= 1.0 + 1e-12
    w = sobolev_weight(g)
    x1, x2 = g.frequency_mesh()
    r2 = w / (1 + x1 ** 2 + x2 ** 2)
    assert r2.min() >= 4 / np.pi ** 2 - 1e-12 and r2.max() <= 1.0 + 1e-12


def test_weight_object(grid8):
    w = SobolevWeight(grid8, "paper_literal")
    assert np.array_equal(w.values, sobolev_weight(grid8, "paper_literal"))
    assert np.allclose(w.power(0.5) ** 2, w.values)
    with pytest.raises(PreconditionError):
        SobolevWeight(grid8, "other")
