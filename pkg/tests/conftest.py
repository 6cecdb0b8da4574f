import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cahnfv import ConstantMobility, DegenerateMobility, DoubleWell, Logarithmic, ModelParams, WettingParams

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def model_grid():
    """Every potential x mobility x wetting combination used by the oracle tests."""
    out = []
    for pot in (DoubleWell(), Logarithmic(0.3, 1.0)):
        for mob in (ConstantMobility(1.0), DegenerateMobility(1.0)):
            for wet in (WettingParams(enabled=False), WettingParams(2 * math.pi / 3), WettingParams(math.pi / 4)):
                out.append(ModelParams(pot, mob, 0.5, wet))
    return out


def model_id(m):
    pot = "log" if m.potential.singular else "dw"
    mob = "degen" if m.mobility.degenerate else "const"
    wet = f"beta{m.wetting.beta:.2f}" if m.wetting.enabled else "dry"
    return f"{pot}-{mob}-{wet}"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
