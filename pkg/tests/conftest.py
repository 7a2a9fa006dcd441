import numpy as np
import pytest

from quasifree.linalg import dagger


def random_hermitian(rng, n, size=None):
    shape = (n, n) if size is None else (size, n, n)
    X = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return 0.5 * (X + dagger(X))


def random_psd(rng, n, size=None):
    shape = (n, n) if size is None else (size, n, n)
    X = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return X @ dagger(X)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
