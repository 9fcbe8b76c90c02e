import itertools

import pytest

from byzshield import _backend
from byzshield.assignment import (
    build_baseline_assignment,
    build_frc_assignment,
    build_mols_assignment,
    build_ramanujan_assignment,
)

BACKENDS = ["python"] + (["cython"] if _backend.compiled_kernel is not None else [])


@pytest.fixture(scope="session")
def mols53():
    return build_mols_assignment(5, 3)


@pytest.fixture(scope="session")
def mols73():
    return build_mols_assignment(7, 3)


@pytest.fixture(scope="session")
def mols75():
    return build_mols_assignment(7, 5)


@pytest.fixture(scope="session")
def ram2_55():
    return build_ramanujan_assignment(5, 5)


@pytest.fixture(scope="session")
def ram1_35():
    return build_ramanujan_assignment(3, 5)


@pytest.fixture(scope="session")
def frc153():
    return build_frc_assignment(15, 3)


@pytest.fixture(scope="session")
def baseline15():
    return build_baseline_assignment(15)


def brute_force_cmax(graph, q):
    """Independent oracle: plain loops over every coalition and every file."""
    best = 0
    for S in itertools.combinations(range(graph.K), q):
        members = set(S)
        hit = sum(
            1
            for workers in graph.file_workers
            if sum(1 for j in workers if j in members) >= (graph.r + 1) // 2
        )
        best = max(best, hit)
    return best


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
