import itertools

import numpy as np
import pytest


def brute_force_margin(X, k):
    """Independent oracle: LAPACK eigvalsh on every k-subset Gram deviation."""
    X = np.asarray(X, dtype=float)
    best = 0.0
    for S in itertools.combinations(range(X.shape[1]), k):
        G = X[:, S].T @ X[:, S] - np.eye(k)
        best = max(best, float(np.max(np.abs(np.linalg.eigvalsh(G)))))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def e1e1():
    return np.array([[1.0, 1.0], [0.0, 0.0]])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
