import numpy as np
import pytest

from latticepdo import oracle
from latticepdo.exceptions import NumericalError, PreconditionError
from latticepdo.lattice import LatticeGrid, restrict_quadrant
from latticepdo.solvers import apply_operator, random_quadrant_rhs, solve_unique
from latticepdo.symbols import PeriodicSymbol, catalog_factorization


@pytest.fixture(scope="module")
def case():
    g = LatticeGrid(0.125, 64)
    fact = catalog_factorization("exp_split(0,0.1,0.8)", g)
    v = random_quadrant_rhs(g, 0, 0.5)
    return g, fact, v, solve_unique(fact, 0.0, v)


@pytest.mark.parametrize("conv", ["closed", "open"])
def test_dense_apply_matches_spectral(case, conv):
    g, fact, _, _ = case
    p = oracle.assemble_dense(fact.symbol, 8, conv)
    w = p.extend(p.restrict(restrict_quadrant(random_quadrant_rhs(g, 5, 0.3, conv), conv)))
    idx = p.window_indices() + g.N
    a = oracle.dense_apply(p, w).values[np.ix_(idx, idx)]
    b = apply_operator(fact.symbol, w).values[np.ix_(idx, idx)]
    assert np.abs(a - b).max() <= 1e-12 * np.abs(b).max()


def test_interior_agreement_improves(case):
    _, fact, v, u = case
    errs = []
    for M in (8, 16):
        p = oracle.assemble_dense(fact.symbol, M).with_rhs(v)
        errs.append(oracle.interior_error(p, u, oracle.dense_solve(p)))
    assert errs[0] == pytest.approx(4.297977278140766e-09, rel=1e-4)
    assert errs[1] <= 1e-12


def test_restrict_extend_roundtrip(case):
    g, fact, v, _ = case
    p = oracle.assemble_dense(fact.symbol, 8, "open")
    vec = p.restrict(v)
    assert vec.shape == (64,)
    back = p.extend(vec)
    assert np.array_equal(p.restrict(back), vec)
    assert back.values[g.N, g.N] == 0  # outside the open window


def test_decay_guard_and_window_bounds():
    g = LatticeGrid(0.125, 16)
    slow = catalog_factorization("plus(1,1)", g).symbol.inverse()
    with pytest.raises(PreconditionError, match="decayed"):
        oracle.assemble_dense(slow, 8)
    ok = catalog_factorization("identity", g).symbol
    with pytest.raises(PreconditionError):
        oracle.assemble_dense(ok, 9)
    with pytest.raises(PreconditionError):
        oracle.dense_solve(oracle.assemble_dense(ok, 4))


def test_singular_matrix_rejected():
    g = LatticeGrid(0.125, 16)
    zero_mean = PeriodicSymbol(g, np.where(np.arange(g.size)[:, None] == g.N, 0.0, 1.0) * np.ones(g.size))
    p = oracle.assemble_dense(PeriodicSymbol(g, np.zeros((g.size, g.size))), 2)
    p.rhs = np.ones(4)
    with pytest.raises(NumericalError):
        oracle.dense_solve(p)
    assert oracle.kernel_tail(zero_mean, g.N + 1) == 0.0
