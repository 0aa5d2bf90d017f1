import math

import numpy as np
import pytest

from shgcat.hilbert import build_initial_state
from shgcat.observables import reduce_pump
from shgcat.propagator import evolve

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rho_50():
    return reduce_pump(evolve(build_initial_state(math.sqrt(50)), 0.463))


@pytest.fixture(scope="session")
def rho_100():
    return reduce_pump(evolve(build_initial_state(10.0), 0.352))


def random_state(rng, max_N=12, n_blocks=None):
    """Normalised random block state over a random subset of N <= max_N."""
    from shgcat.hilbert import TwoModeState

    n_blocks = n_blocks or int(rng.integers(1, 5))
    Ns = np.sort(rng.choice(np.arange(max_N + 1), size=n_blocks, replace=False))
    blocks = [rng.normal(size=N // 2 + 1) + 1j * rng.normal(size=N // 2 + 1) for N in Ns]
    norm = math.sqrt(sum(np.vdot(b, b).real for b in blocks))
    return TwoModeState(tuple(int(N) for N in Ns), tuple(b / norm for b in blocks))
