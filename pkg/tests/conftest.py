import numpy as np
import pytest

from ideal_amg.suites import (
    EXAMPLE_A,
    EXAMPLE_M,
    EXAMPLE_P,
    EXAMPLE_PSTAR,
    EXAMPLE_X,
    example_decomposition,
    random_spd,
)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ex():
    """The 3x3 counter-example: A, X = diag(A), coarse point 3, P = e3."""
    class Ex:
        a = EXAMPLE_A.copy()
        x = EXAMPLE_X.copy()
        m = EXAMPLE_M.copy()
        p = EXAMPLE_P.copy()
        pstar = EXAMPLE_PSTAR.copy()
        d = example_decomposition()
    return Ex


@pytest.fixture
def spd(rng):
    return lambda n, cond=1e3: random_spd(rng, n, cond)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
