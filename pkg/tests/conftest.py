import math

import pytest

from gieshield import params as pm

DX = 50e-9


@pytest.fixture(scope="session")
def silica():
    return pm.couplings(pm.TABLE1_GEOMETRY, pm.SILICA)


@pytest.fixture(scope="session")
def lead():
    return pm.couplings(pm.TABLE1_GEOMETRY, pm.LEAD, pm.TABLE1_B_TRAP)


@pytest.fixture(scope="session")
def t0_silica(silica):
    return pm.time_unit(silica.lam, DX)


@pytest.fixture(scope="session")
def t0_lead(lead):
    return pm.time_unit(lead.lam, DX)


LINEAR = math.pi / 2
PARALLEL = 0.0


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split("criterion")[1].split()[0])):
            terminalreporter.write_line(line)
