import numpy as np
import pytest

from pwretrieval.frames import canonical_frame_k2
from pwretrieval.grids import shannon_grid
from pwretrieval.measurement import ModulatorBank

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def frame2():
    return canonical_frame_k2()


@pytest.fixture
def grid_j8():
    """K=2, a=1 grid on 2*pi*Z whose window is exactly 2*pi*j, |j| <= 8."""
    return shannon_grid(1.0, 2, 1, -9, 6)


@pytest.fixture
def bank_j8(frame2, grid_j8):
    return ModulatorBank(frame2, grid_j8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
