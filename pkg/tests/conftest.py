import numpy as np
import pytest
from hypothesis import settings

from photonstats.models import ModelParams

settings.register_profile("default", max_examples=30, deadline=None)
settings.load_profile("default")


@pytest.fixture
def fig1_params():
    """Jaynes-Cummings figure parameters at Delta = 0."""
    return ModelParams.jc(0.0, 50.0, g=50.0, omega=0.1, gamma=1.0)


@pytest.fixture
def fig2_params():
    """Motional-model figure parameters at nu = 0 (delta = -100)."""
    return ModelParams.com(-100.0, 0.0, g=50.0, omega=0.1, gamma=1.0, Gamma=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
