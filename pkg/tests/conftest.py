import numpy as np
import pytest

from jcs_music import bind, load_config
from jcs_music.channel import NoiseConfig, WaveformConfig
from jcs_music.steering import ArrayConfig


@pytest.fixture(scope="session")
def ctx():
    return bind(load_config())


@pytest.fixture(scope="session")
def small_wave():
    """Reduced numerology for fast synthesis-heavy tests."""
    return WaveformConfig(n_subcarriers=64, n_symbols=32)


@pytest.fixture(scope="session")
def small_array(small_wave):
    lam = small_wave.wavelength()
    return ArrayConfig(rows=4, cols=4, spacing=lam / 2, wavelength=lam)


@pytest.fixture(scope="session")
def noise_cfg():
    return NoiseConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
