import numpy as np
import pytest

from renormlab.maps import QuadraticFamily
from renormlab.renorm import THETA_DOUBLING, THETA_TRIPLING, tower
from renormlab.solver import solve_fixed_point, solve_periodic_orbit, spectrum

# accumulation of the superstable doubling cascade, frozen from the
# bisection + geometric-tail extrapolation route (stable to 1e-13)
C_INF = 1.4011551890920328

ACCEPT_LINES: list[str] = []


def record_accept(line: str) -> None:
    ACCEPT_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPT_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fixed_point_24():
    return solve_fixed_point(degree=24)


@pytest.fixture(scope="session")
def fixed_point_32():
    return solve_fixed_point(degree=32)


@pytest.fixture(scope="session")
def fixed_point_16():
    return solve_fixed_point(degree=16)


@pytest.fixture(scope="session")
def tripling_fixed_point():
    return solve_fixed_point(theta=THETA_TRIPLING, degree=24)


@pytest.fixture(scope="session")
def two_cycle():
    return solve_periodic_orbit([THETA_DOUBLING, THETA_TRIPLING], degree=24)


@pytest.fixture(scope="session")
def spectrum_24(fixed_point_24):
    return spectrum(fixed_point_24.map)


@pytest.fixture(scope="session")
def tower_8(fixed_point_24):
    return tower(fixed_point_24.map, 8)


@pytest.fixture(scope="session")
def tower_9(fixed_point_24):
    return tower(fixed_point_24.map, 9)


@pytest.fixture(scope="session")
def quadratic():
    return QuadraticFamily()
