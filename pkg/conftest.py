"""
Shared fixtures for the qdmollow test suite.
"""
import os

import pytest
from hypothesis import HealthCheck, settings

from qdmollow.models.schemas import CoupledCavityReservoirConfig, NumericsConfig, PhononConfig
from qdmollow.services.phonon_bath import PhononBath
from qdmollow.services.photon_reservoir import CoupledCavityReservoir, FlatReservoir
from qdmollow.settings import DATA_DIR

settings.register_profile(
    "fast", max_examples=20, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.register_profile("thorough", max_examples=200, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture(scope="session")
def numerics():
    return NumericsConfig()


@pytest.fixture(scope="session")
def bath_4k(numerics):
    return PhononBath(PhononConfig(T=4.0), numerics)


@pytest.fixture(scope="session")
def no_bath(numerics):
    return PhononBath(PhononConfig(enabled=False), numerics)


@pytest.fixture(scope="session")
def flat():
    return FlatReservoir(1.5)


@pytest.fixture(scope="session")
def waveguide(numerics):
    return CoupledCavityReservoir.from_config(CoupledCavityReservoirConfig(pf_mid_band=2.0), 1.5, numerics)


@pytest.fixture(scope="session")
def presets_dir():
    return DATA_DIR / "presets"


@pytest.fixture(scope="session")
def w1_sample():
    return DATA_DIR / "w1_sample_ldos.txt"
