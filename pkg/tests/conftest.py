import math

import pytest
from hypothesis import HealthCheck, settings

from boussym.model import PhysicalParams
from boussym.solution import solve_invariant
from boussym.timefuncs import default_time_functions

settings.register_profile("boussym", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("boussym")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


@pytest.fixture(scope="session")
def params():
    return PhysicalParams(1.0, 2.0, 9.8)


@pytest.fixture(scope="session")
def params_f0():
    return PhysicalParams(0.0, 1.5, 9.8)


@pytest.fixture(scope="session")
def abc():
    return default_time_functions()[0]


@pytest.fixture(scope="session")
def solution(params):
    # K = 1, B = 1: start at phi = 0 with phi' = 1
    return solve_invariant(params, 0.0, 1.0, 30.0, K=1.0, drift_tol=1e-10)


@pytest.fixture(scope="session")
def equilibrium(params):
    A = 0.0
    return solve_invariant(params, 0.0, 0.0, 10.0, A=A)


def c_star_for_K1_B1():
    return math.sqrt((-1.0 + math.sqrt(5.0)) / 2.0)
