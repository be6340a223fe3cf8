import numpy as np
import pytest

from specpc import RadarConfig, build_dictionary, uniform_linear_array


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_config():
    # 4 receivers x 2 replicas = 8 virtual elements
    return RadarConfig(n_rx=4, n_range=32, n_doppler=32, n_tx_signatures=2, range_resolution=0.5, doppler_resolution=0.1)


@pytest.fixture
def ula8():
    return uniform_linear_array(8)


@pytest.fixture
def dict8(ula8):
    return build_dictionary(ula8, (64, 1))
