import numpy as np
import pytest

from irdgen import CCIInputs, TypeDistribution

PAPER_Q = [0.1, 0.15, 0.25, 0.5]
PAPER_P = [[0.2, 0.2], [0.0, 0.1], [0.5, 0.0]]
PAPER_I = [[0, 1, 1], [1, 0, 1], [1, 1, 0], [0, 1, 0]]
PAPER_J = [[1, 0], [0, 1], [1, 1], [0, 1]]


def paper_inputs(mu=1.0):
    return CCIInputs(mu, TypeDistribution(PAPER_Q), PAPER_P, PAPER_I, PAPER_J)


def paper_params(mu=1.0):
    return {"mu": mu, "q": PAPER_Q, "P": PAPER_P, "I": PAPER_I, "J": PAPER_J}


@pytest.fixture
def cci_inputs():
    return paper_inputs()


def bisect_survival(c, tol=1e-14):
    """Largest root of x = 1 - exp(-c x) on [0, 1] by bisection."""
    f = lambda x: 1.0 - np.exp(-c * x) - x
    if c <= 1.0:
        return 0.0
    lo, hi = 1e-12, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def reachability_sccs(n, src, dst):
    """Partition into SCCs via Warshall transitive closure (brute force)."""
    reach = np.eye(n, dtype=bool)
    reach[src, dst] = True
    for k in range(n):
        reach |= reach[:, k:k + 1] & reach[k:k + 1, :]
    mutual = reach & reach.T
    return {frozenset(np.flatnonzero(mutual[v]).tolist()) for v in range(n)}


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
