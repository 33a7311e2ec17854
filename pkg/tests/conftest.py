import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from electroadhesion.electrostatics import LayerSet, SimulationConfig  # noqa: E402
from electroadhesion.materials import DielectricLayer, GapMedium, stratum_corneum  # noqa: E402
from electroadhesion.rough_contact import (  # noqa: E402
    ElasticPair,
    RoughnessSpec,
    effective_conductivity,
    effective_modulus,
)

# nominal fingertip-on-screen parameters
D1, D2 = 1e-6, 200e-6
EPS1_R = 3.9
SIGMA_SIO2, SIGMA_AIR = 1e-13, 1e-14
Y1, Y2, NU1, NU2 = 70e9, 10e6, 0.15, 0.5
H_RMS, HURST, Q_L, Q_0, Q_1 = 22e-6, 0.86, 9e2, 8e3, 1e10
P0, A0, V0 = 5e3, 100e-6, 75.0


@pytest.fixture(scope="session")
def roughness():
    return RoughnessSpec(H_RMS, HURST, Q_L, Q_0, Q_1)


@pytest.fixture(scope="session")
def insulator():
    return DielectricLayer("SiO2", D1, EPS1_R, SIGMA_SIO2, Y1, NU1)


@pytest.fixture(scope="session")
def skin():
    return stratum_corneum(D2, Y2, NU2)


@pytest.fixture(scope="session")
def layers(insulator, skin):
    return LayerSet(insulator, skin, GapMedium())


@pytest.fixture(scope="session")
def pair():
    return ElasticPair(effective_modulus(Y1, NU1, Y2, NU2), effective_conductivity(SIGMA_SIO2, 1e-7))


@pytest.fixture(scope="session")
def fast_cfg():
    """Coarser separation grid so electrostatics tests stay quick."""
    return SimulationConfig(points_per_decade=200, n_u=300, frequencies_hz=(1.0, 250.0, 1e5))


def omega(f):
    return 2 * math.pi * f


# acceptance criteria register their outcome here; printed after the run
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {number:>2}. {title}: {detail}")
