import numpy as np
import pytest
from scipy.io import wavfile


def _speechlike(duration: float, fs: int, seed: int) -> np.ndarray:
    """Modulated filtered noise; enough structure for scoring smoke tests."""
    rng = np.random.default_rng(seed)
    n = int(duration * fs)
    x = rng.standard_normal(n)
    # crude spectral tilt plus syllable-rate amplitude modulation
    x = np.convolve(x, [1.0, 0.6, 0.3, 0.15], mode="same")
    t = np.arange(n) / fs
    env = 0.55 + 0.45 * np.sin(2 * np.pi * 3.1 * t + rng.uniform(0, 6.28))
    x = x * env
    return (x / np.max(np.abs(x)) * 0.7).astype(np.float64)


@pytest.fixture()
def wav_file(tmp_path):
    path = tmp_path / "utt.wav"
    wavfile.write(path, 16000, _speechlike(1.2, 16000, seed=1).astype(np.float32))
    return str(path)


@pytest.fixture()
def make_wav(tmp_path):
    counter = {"n": 0}

    def _make(samples: np.ndarray, fs: int = 16000) -> str:
        counter["n"] += 1
        path = tmp_path / f"w{counter['n']}.wav"
        wavfile.write(path, fs, samples.astype(np.float32))
        return str(path)

    return _make


@pytest.fixture()
def speechlike():
    return _speechlike
