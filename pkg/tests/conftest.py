import numpy as np
import pytest

from ccfilter import FilterDesign

REFERENCE_DESIGN = FilterDesign(R1=10e3, R3=14e3, R4=10e3, R6=10e3, C2=10e-9, C5=10e-9)

_ACCEPTANCE_LINES = []


def random_design(rng, gains=False, **fixed):
    """Log-uniform R in [1k, 100k] ohm and C in [100p, 100n] F."""
    values = {name: 10 ** rng.uniform(3, 5) for name in ("R1", "R3", "R4", "R6")}
    values.update({name: 10 ** rng.uniform(-10, -7) for name in ("C2", "C5")})
    if gains:
        values.update({name: rng.uniform(0.9, 1.1) for name in ("B1", "B2", "K1", "K2")})
    values.update(fixed)
    return FilterDesign(**values)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def reference_design():
    return REFERENCE_DESIGN


@pytest.fixture(scope="session")
def acceptance_report():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
