import pytest

from levy_procure.levy_price import Deterministic, GeometricBrownian, JumpDiffusion
from levy_procure.payoff import MarketParams


@pytest.fixture
def base():
    return MarketParams()


@pytest.fixture
def gbm():
    return GeometricBrownian(0.7, 0.2)


@pytest.fixture
def jd():
    return JumpDiffusion(0.7, 0.2, 2.0, 9.0)


@pytest.fixture
def idle_market():
    """Parameters where never buying is optimal."""
    return MarketParams(lam=0.3)


@pytest.fixture
def idle_model():
    return GeometricBrownian(-0.5, 0.2)


@pytest.fixture
def growth():
    return Deterministic(0.7)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
