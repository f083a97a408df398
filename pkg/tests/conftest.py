import numpy as np
import pytest

from calogero.phase_core import Coupling, PhaseState, random_state


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def two_body():
    """Symmetric pair at rest: x = (1, -1), p = 0, repulsive coupling."""
    return PhaseState([1.0, -1.0], [0.0, 0.0], Coupling.IMAGINARY)


@pytest.fixture
def two_body_real():
    return PhaseState([1.0, -1.0], [0.0, 0.0], Coupling.REAL)


@pytest.fixture
def shifted_pair():
    return PhaseState([2.0, 0.0], [1.0, 0.0], Coupling.IMAGINARY)


def states(rng, n, count, coupling=Coupling.IMAGINARY):
    return [random_state(n, rng, coupling) for _ in range(count)]


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
