import numpy as np
import pytest

from logan.sem import SemModel


def cancel_w():
    """E -> M2, M2 -> M3, M2 -> Y, M3 -> Y with unit magnitudes (d = 3)."""
    w = np.zeros((5, 5))
    w[2, 0] = 1.0
    w[3, 2] = -1.0
    w[4, 2] = -1.0
    w[4, 3] = -1.0
    return w


def chain_w(p=3, weight=1.5):
    w = np.zeros((p, p))
    for j in range(1, p):
        w[j, j - 1] = weight
    return w


def random_dag(rng, p, density=0.4, low=0.5, high=2.0):
    mask = np.tril(rng.random((p, p)) < density, k=-1)
    w = np.where(mask, rng.uniform(low, high, (p, p)) * rng.choice([-1, 1], (p, p)), 0.0)
    perm = rng.permutation(p)
    return w[np.ix_(perm, perm)]


@pytest.fixture
def cancel():
    return SemModel(cancel_w(), np.zeros(5), 1.0)


@pytest.fixture
def chain():
    return SemModel(chain_w(), np.zeros(3), 1.0)


# ---- acceptance summary --------------------------------------------------------

ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
