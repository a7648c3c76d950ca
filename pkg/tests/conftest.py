import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def pair_instance():
    """x1=(1) positive, x2=(0.5) negative."""
    return np.array([[1.0], [0.5]]), np.array([1, -1])


@pytest.fixture
def three_point_pauc():
    """One positive at 1, negatives at 0.5 and -1."""
    return np.array([[1.0], [0.5], [-1.0]]), np.array([1, -1, -1])
