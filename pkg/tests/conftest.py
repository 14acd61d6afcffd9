import numpy as np
import pytest

from cutvem.harness import DOMAIN
from cutvem.geometry import Circle
from cutvem.mesh import build_background_mesh, cut_mesh

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def circle():
    return Circle(np.pi / 5)


@pytest.fixture(scope="session")
def mesh10(circle):
    return cut_mesh(build_background_mesh(10, DOMAIN), circle)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
