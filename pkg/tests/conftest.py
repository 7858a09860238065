"""Shared fixtures and hypothesis settings."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fluxbed import DeviceConfig, build_device

settings.register_profile(
    "suite",
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def device_1q():
    """Single-qubit device with the default 30% crosstalk and random offsets."""
    return build_device(DeviceConfig(n_qubits=1, crosstalk_fraction=0.3, seed=42))


@pytest.fixture(scope="session")
def device_2q():
    return build_device(DeviceConfig(n_qubits=2, crosstalk_fraction=0.3, seed=7))


@pytest.fixture(scope="session")
def device_clean():
    """No crosstalk, no offsets: fluxes equal designed mutual times current."""
    return build_device(DeviceConfig(n_qubits=1, crosstalk_fraction=0.0,
                                     random_offsets=False, seed=0))


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
