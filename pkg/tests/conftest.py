import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from owgame.model import GridSpec, ModelParams

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# (criterion, passed, detail) lines collected by the acceptance tests
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def params3():
    return ModelParams.create(rho=1.0, T=1.0, theta=0.1, inventories=[2.0, 0.0, 1.0])


@pytest.fixture
def grid50():
    return GridSpec.uniform(50, 1.0)


def uniform(N, T=1.0):
    return GridSpec.uniform(N, T)


def max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
