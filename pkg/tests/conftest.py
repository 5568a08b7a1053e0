import pytest

from hematodyn.model import HillBeta, ModelParams

DELTA = 0.05
BETA0 = 1.77

ACCEPTANCE_LINES: list[str] = []


def hill_params(tau=0.0, n=12.0, delta=DELTA, beta0=BETA0):
    return ModelParams(delta, tau, HillBeta(beta0, 1.0, n))


@pytest.fixture
def par12():
    return hill_params()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
