import pytest
from hypothesis import HealthCheck, settings

from weakmeas import hardy

settings.register_profile(
    "suite", deadline=None, max_examples=50,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


@pytest.fixture(scope="session")
def scenario():
    return hardy.build()


@pytest.fixture(scope="session")
def ensemble(scenario):
    return scenario.ensemble
