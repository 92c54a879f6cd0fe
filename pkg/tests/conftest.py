import math

import pytest
from hypothesis import HealthCheck, settings

from jacedge.coefficients import chebyshev_model, free_model, power_law_model

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def free():
    return free_model()


@pytest.fixture
def cheb():
    return chebyshev_model()


@pytest.fixture
def sqrt_model():
    """``a_n = 1 - 0.25 n^(-1/2)``, ``b_n = 0``."""
    return power_law_model(a=[(0.25, 0.5)])


@pytest.fixture
def inv_model():
    """``a_n = 1 - 1/n`` with ``a_1`` replaced so that it stays positive."""
    return power_law_model(a=[(1.0, 1.0)], overrides={1: (0.5, 0.0)})


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


SQRT2 = math.sqrt(2.0)


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one summary line per acceptance criterion."""

    def _report(name, ok, detail):
        line = f"{name} {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
