import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from dyngreen import MapPair, lattes_from_curve

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

SQUARE = MapPair.from_coeffs([1, 0, 0], [0, 0, 1], "square")
NEWTON = MapPair.from_coeffs([1, 0, 1], [0, 2, 0], "newton")
CHEBYSHEV_LIKE = MapPair.from_coeffs([1, 0, 1], [0, 1, 0], "x2+y2,xy")
CUBIC = MapPair.from_coeffs([1, -2, 0, 1], [1, 1, -1, 2], "cubic")
LATTES = lattes_from_curve(-1, 0)

TEST_MAPS = {"square": SQUARE, "newton": NEWTON, "lattes": LATTES, "cubic": CUBIC}


@pytest.fixture
def square():
    return SQUARE


@pytest.fixture
def newton():
    return NEWTON


@pytest.fixture
def lattes():
    return LATTES


@pytest.fixture
def cubic():
    return CUBIC


# acceptance criteria register their verdicts here for the terminal summary
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
