import numpy as np
import pytest

from swkb import interior
from swkb.potential import EnergyWindow, WModel, make_potential


@pytest.fixture(scope="session")
def p_free():
    return make_potential(1.0, 1.0, WModel("zero"), allow_zero=True)


@pytest.fixture(scope="session")
def p_lin():
    # gamma=1, W=1: V(x) = x, the Airy-solvable case
    return make_potential(1.0, 1.0, WModel("constant", (1.0,)))


@pytest.fixture(scope="session")
def p_half():
    return make_potential(0.5, 1.0, WModel("polynomial", (1.0, 0.5)))


@pytest.fixture(scope="session")
def win23():
    return EnergyWindow(2.0, 3.0)


@pytest.fixture(scope="session", autouse=True)
def _warm_numba(p_lin):
    # first jit compile otherwise lands in an arbitrary test's timing
    cfg = interior.make_config(p_lin, 2.0, 5e-2)
    interior.solve_basis(p_lin, cfg)
    yield


def assert_slope(hs, errs, lo, hi=None):
    hs = np.asarray(hs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    keep = errs > 0
    slope = np.polyfit(np.log(hs[keep]), np.log(errs[keep]), 1)[0]
    assert slope >= lo, f"fitted slope {slope:.3f} < {lo}"
    if hi is not None:
        assert slope <= hi, f"fitted slope {slope:.3f} > {hi}"
    return slope
