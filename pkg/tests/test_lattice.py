import numpy as np
import pytest
from hypothesis import given, strategies as st

from latticepdo.exceptions import PreconditionError
from latticepdo.lattice import (
    GridFunction,
    LatticeGrid,
    LineFunction,
    QuadrantConvention,
    dft1_forward,
    dft1_inverse,
    dft_forward,
    dft_inverse,
    discrete_laplacian,
    divided_difference,
    exterior_mass,
    impulse,
    quadrant_mask,
    restrict_quadrant,
    zeta,
    zeta_squared,
)

from conftest import random_grid_function

steps = st.sampled_from([0.5, 0.25, 0.125, 0.1, 0.03125])
sizes = st.sampled_from([2, 4, 8, 16])
seeds = st.integers(0, 2 ** 31 - 1)


def direct_transform(u):
    """Plain double sum, independent of the FFT path."""
    g = u.grid
    m = g.indices
    E = np.exp(-1j * g.h * np.outer(g.frequencies, m))
    return g.h ** 2 * E @ u.values @ E.T


def test_grid_validation():
    with pytest.raises(PreconditionError):
        LatticeGrid(0.1, 6)
    with pytest.raises(PreconditionError):
        LatticeGrid(-1.0, 8)
    with pytest.raises(PreconditionError):
        LatticeGrid(0.1, 1)
    with pytest.raises(PreconditionError):
        LatticeGrid.from_window(0.3, 1.0)
    assert LatticeGrid.from_window(0.125, 4.0).N == 32


def test_grid_nodes():
    g = LatticeGrid(0.25, 4)
    assert g.indices[0] == -4 and g.indices[-1] == 3
    assert g.position(0) == 4
    assert np.isclose(g.dxi, np.pi)
    assert np.isclose(g.frequencies[0], -np.pi / g.h)
    assert g.hbar == 4.0
    with pytest.raises(IndexError):
        g.position(4)


def test_convention_coerce():
    assert QuadrantConvention.coerce("open") is QuadrantConvention.OPEN
    with pytest.raises(PreconditionError):
        QuadrantConvention.coerce("half")


def test_forward_matches_direct_sum(grid8):
    u = random_grid_function(grid8, 3)
    ref = direct_transform(u)
    assert np.abs(dft_forward(u).values - ref).max() <= 1e-12 * np.abs(ref).max()


def test_impulse_has_unit_spectrum(grid8):
    s = dft_forward(impulse(grid8))
    assert np.allclose(s.values, 1.0, atol=1e-14)


def test_shifted_impulse_is_a_phase(grid8):
    s = dft_forward(impulse(grid8, 1, 0))
    xi1, _ = grid8.frequency_mesh()
    assert np.allclose(s.values, np.exp(-1j * grid8.h * xi1), atol=1e-14)


@given(steps, sizes, seeds)
def test_roundtrip_and_parseval(h, N, seed):
    g = LatticeGrid(h, N)
    u = random_grid_function(g, seed)
    s = dft_forward(u)
    assert np.abs(dft_inverse(s).values - u.values).max() <= 1e-12 * np.abs(u.values).max()
    lhs = (np.abs(u.values) ** 2).sum() * h * h
    rhs = (np.abs(s.values) ** 2).sum() * g.dxi ** 2 / (4 * np.pi ** 2)
    assert abs(lhs - rhs) <= 1e-12 * lhs


@given(steps, sizes, seeds)
def test_line_roundtrip_and_parseval(h, N, seed):
    g = LatticeGrid(h, N)
    rng = np.random.default_rng(seed)
    f = LineFunction(g, rng.standard_normal(g.size) + 1j * rng.standard_normal(g.size))
    s = dft1_forward(f)
    assert np.abs(dft1_inverse(s).values - f.values).max() <= 1e-12 * np.abs(f.values).max()
    lhs = (np.abs(f.values) ** 2).sum() * h
    rhs = (np.abs(s.values) ** 2).sum() * g.dxi / (2 * np.pi)
    assert abs(lhs - rhs) <= 1e-12 * lhs


@pytest.mark.parametrize("stencil,sign", [("multiplier", -1), ("forward", 1)])
@pytest.mark.parametrize("axis", [1, 2])
@pytest.mark.parametrize("order", [1, 2])
def test_difference_multipliers(grid8, stencil, sign, axis, order):
    u = random_grid_function(grid8, 11)
    z = zeta(grid8, sign)
    mult = (z[:, None] if axis == 1 else z[None, :]) ** order
    got = dft_forward(divided_difference(u, axis, order, stencil)).values
    ref = mult * dft_forward(u).values
    assert np.abs(got - ref).max() <= 1e-12 * np.abs(ref).max()


def test_multiplier_stencil_is_backward_difference(grid8):
    u = random_grid_function(grid8, 5)
    d = divided_difference(u, 1)
    N = grid8.N
    expect = (u.values[N - 1, N + 2] - u.values[N, N + 2]) / grid8.h
    assert np.isclose(d.values[N, N + 2], expect)


def test_laplacian_multiplier(grid8):
    u = random_grid_function(grid8, 7)
    got = dft_forward(discrete_laplacian(u)).values
    ref = zeta_squared(grid8) * dft_forward(u).values
    assert np.abs(got - ref).max() <= 1e-12 * np.abs(ref).max()


def test_zeta_small_frequency_limit():
    g = LatticeGrid(1e-3, 8)
    # zeta ~ -i xi for h xi -> 0
    xi = g.frequencies[g.N + 1]
    assert abs(zeta(g)[g.N + 1] - (-1j * xi)) <= 2 * g.h * xi ** 2


def test_bad_difference_arguments(grid8):
    u = random_grid_function(grid8, 1)
    with pytest.raises(PreconditionError):
        divided_difference(u, 3)
    with pytest.raises(PreconditionError):
        divided_difference(u, 1, stencil="central")


def test_quadrant_masks(grid8):
    closed = quadrant_mask(grid8, "closed")
    opened = quadrant_mask(grid8, "open")
    assert closed.sum() == grid8.N ** 2
    assert opened.sum() == (grid8.N - 1) ** 2
    assert not (opened & ~closed).any()
    minus = quadrant_mask(grid8, "closed", side=-1)
    assert (closed & minus).sum() == 1  # only the origin


def test_restrict_and_exterior(grid8):
    u = random_grid_function(grid8, 2)
    r = restrict_quadrant(u, "closed")
    assert exterior_mass(r, quadrant_mask(grid8, "closed")) == 0.0
    assert exterior_mass(u, quadrant_mask(grid8, "closed")) > 0.1
    assert exterior_mass(GridFunction.zeros(grid8), quadrant_mask(grid8)) == 0.0


def test_shape_check(grid8):
    with pytest.raises(PreconditionError):
        GridFunction(grid8, np.zeros((3, 3)))


def test_grid_mismatch_arithmetic(grid8):
    a = GridFunction.zeros(grid8)
    b = GridFunction.zeros(LatticeGrid(0.25, 8))
    with pytest.raises(PreconditionError):
        a + b
