import pytest

from bcmnet.topology import build_topology

FIG1_EDGES = [(0, 1), (0, 2), (0, 3), (0, 5), (1, 3), (1, 4), (2, 3), (3, 4), (3, 5)]
PRISM_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 4), (2, 5), (3, 4), (3, 5), (4, 5)]

FIG1_MATRIX = [
    [0, 1, 1, 1, 2, 1],
    [1, 0, 2, 1, 1, 2],
    [1, 2, 0, 1, 2, 2],
    [1, 1, 1, 0, 1, 1],
    [2, 1, 2, 1, 0, 2],
    [1, 2, 2, 1, 2, 0],
]
PRISM_MATRIX = [
    [0, 1, 1, 1, 2, 2],
    [1, 0, 1, 2, 1, 2],
    [1, 1, 0, 2, 2, 1],
    [1, 2, 2, 0, 1, 1],
    [2, 1, 2, 1, 0, 1],
    [2, 2, 1, 1, 1, 0],
]


@pytest.fixture
def fig1():
    return build_topology(6, FIG1_EDGES)


@pytest.fixture
def prism():
    return build_topology(6, PRISM_EDGES)


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
