import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_orthogonal(rng, n=4):
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    return Q * np.sign(np.diag(R))


def random_conditioned(rng, bound=100.0):
    """Random invertible 4x4 matrix with condition number below ``bound``."""
    while True:
        T = rng.normal(size=(4, 4))
        if np.linalg.cond(T) < bound:
            return T


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
