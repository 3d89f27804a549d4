import pytest

from reactive_osa.models import ChannelParams, EnergyDetectorParams, Scenario
from reactive_osa.scenario_config import db_to_linear

# Single-channel and three-channel parameter sets of the throughput experiments
SINGLE = ChannelParams(alpha0=0.1, beta0=0.2, alpha1=0.9, beta1=0.95)
MULTI = [
    ChannelParams(alpha0=0.1, beta0=0.1, alpha1=0.9, beta1=0.95),
    ChannelParams(alpha0=0.1, beta0=0.2, alpha1=0.9, beta1=0.95),
    ChannelParams(alpha0=0.05, beta0=0.6, alpha1=0.9, beta1=0.95),
]
SENSOR = EnergyDetectorParams(m_samples=30, noise_power=1.0, signal_power=db_to_linear(5.0))


def make_scenario(channels, horizon, zeta=0.05):
    return Scenario(channels=list(channels), horizon=horizon, zeta=zeta, sensor=SENSOR)


@pytest.fixture
def sensor():
    return SENSOR


@pytest.fixture
def single():
    return SINGLE


@pytest.fixture
def multi():
    return list(MULTI)
