import numpy as np
import pytest

from vacuum_euler.oracle import AffineOrbit, affine_state
from vacuum_euler.state import FluidState, Grid, Params


def parabola_state(n: int = 401, beta: float = 1.0, v=None, sigma=None) -> FluidState:
    """q = 1 - x^2 on [-1, 1]."""
    g = Grid.uniform(-1.0, 1.0, n)
    x = g.nodes
    q = 1 - x * x
    q[0] = q[-1] = 0.0
    v = np.zeros(n) if v is None else v(x)
    s = np.ones(n) if sigma is None else sigma(x)
    return FluidState(g, q, v, s, Params(beta=beta))


@pytest.fixture
def parabola():
    return parabola_state()


@pytest.fixture
def affine():
    return affine_state(AffineOrbit(0.0, 0.5, 1.0), 401)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
