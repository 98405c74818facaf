import numpy as np
import pytest

from ians.dsp import Waveform
from ians.signals import synthetic_speech, white_noise


@pytest.fixture(scope="session")
def speech_3s() -> Waveform:
    return synthetic_speech(3.0, 16000, seed=11)


@pytest.fixture(scope="session")
def speech_2s() -> Waveform:
    return synthetic_speech(2.0, 16000, seed=23)


@pytest.fixture(scope="session")
def noise_3s() -> Waveform:
    return white_noise(3.0, 16000, seed=31)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
