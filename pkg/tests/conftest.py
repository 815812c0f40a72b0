import numpy as np
import pytest

from consensus_partition.partition import make_hard

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def running_pair():
    """Two hard partitions of three points that disagree on point 2."""
    return make_hard([1, 1, 2], 2), make_hard([1, 2, 2], 2)


@pytest.fixture
def record():
    def _record(criterion, passed, detail=""):
        line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
