import sys
import numpy as np
import pytest
from hypothesis import settings

from latticepdo.lattice import GridFunction, LatticeGrid

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def grid8():
    return LatticeGrid(0.125, 8)


@pytest.fixture
def grid32():
    return LatticeGrid(0.125, 32)


def random_grid_function(grid, seed, complex_=True):
    rng = np.random.default_rng(seed)
    shape = (grid.size, grid.size)
    vals = rng.standard_normal(shape)
    if complex_:
        vals = vals + 1j * rng.standard_normal(shape)
    return GridFunction(grid, vals)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
