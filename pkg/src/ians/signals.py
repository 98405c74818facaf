"""Synthetic test material: speech-like utterances and interference noises.

No speech corpus ships with the package, so the test suite and the demo
CLI synthesize their own utterances: streams of voiced/fricative syllables
with drifting pitch and random formants, separated by pauses. They are not
intelligible, but they exercise an intelligibility metric the way speech
does: broadband spectra, strong envelope modulation in the 2-10 Hz range,
and silent gaps.
"""
from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

from ians.dsp import Waveform


def _resonator(x: np.ndarray, freq: float, bandwidth: float, fs: int) -> np.ndarray:
    r = np.exp(-np.pi * bandwidth / fs)
    theta = 2.0 * np.pi * freq / fs
    a = [1.0, -2.0 * r * np.cos(theta), r * r]
    return lfilter([1.0 - r], a, x)


def _voiced_syllable(n: int, fs: int, rng: np.random.Generator) -> np.ndarray:
    f0 = rng.uniform(90.0, 220.0)
    glide = rng.uniform(-0.25, 0.25)
    t = np.arange(n) / fs
    inst_freq = f0 * (1.0 + glide * t / max(t[-1], 1e-6))
    phase = 2.0 * np.pi * np.cumsum(inst_freq) / fs
    pulses = np.zeros(n)
    wrapped = np.mod(phase, 2.0 * np.pi)
    pulses[1:] = (np.diff(wrapped) < 0).astype(np.float64)
    excitation = lfilter([1.0], [1.0, -0.97], pulses)  # glottal-ish tilt
    out = np.zeros(n)
    for _ in range(rng.integers(2, 5)):
        freq = rng.uniform(280.0, 3200.0)
        out += _resonator(excitation, freq, rng.uniform(60.0, 220.0), fs)
    out += 0.02 * rng.standard_normal(n)  # aspiration
    return out


def _fricative_syllable(n: int, fs: int, rng: np.random.Generator) -> np.ndarray:
    noise = rng.standard_normal(n)
    center = rng.uniform(1800.0, min(6500.0, 0.45 * fs))
    return _resonator(noise, center, rng.uniform(400.0, 1200.0), fs)


def synthetic_speech(duration: float, sample_rate: int = 16000, seed: int = 0) -> Waveform:
    """A speech-like utterance: syllable bursts with pauses, peak 0.5."""
    rng = np.random.default_rng(seed)
    n_total = int(round(duration * sample_rate))
    out = np.zeros(n_total)
    pos = int(0.02 * sample_rate)
    while pos < n_total:
        n_syl = int(rng.uniform(0.10, 0.28) * sample_rate)
        n_syl = min(n_syl, n_total - pos)
        if n_syl < int(0.04 * sample_rate):
            break
        if rng.uniform() < 0.75:
            syl = _voiced_syllable(n_syl, sample_rate, rng)
        else:
            syl = _fricative_syllable(n_syl, sample_rate, rng)
        ramp = int(0.012 * sample_rate)
        env = np.ones(n_syl)
        env[:ramp] = np.linspace(0.0, 1.0, ramp)
        env[-ramp:] = np.linspace(1.0, 0.0, ramp)
        env *= rng.uniform(0.4, 1.0)
        peak = np.max(np.abs(syl))
        if peak > 0:
            out[pos : pos + n_syl] += syl / peak * env
        if rng.uniform() < 0.18:
            gap = rng.uniform(0.20, 0.40)  # word boundary
        else:
            gap = rng.uniform(0.01, 0.09)
        pos += n_syl + int(gap * sample_rate)
    # quiet broadband floor so every third-octave band carries some energy
    out += 1e-4 * rng.standard_normal(n_total)
    peak = np.max(np.abs(out))
    return Waveform(out / peak * 0.5, sample_rate)


def white_noise(duration: float, sample_rate: int = 16000, seed: int = 0) -> Waveform:
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    x = rng.standard_normal(n)
    return Waveform(x / np.max(np.abs(x)) * 0.5, sample_rate)


def pink_noise(duration: float, sample_rate: int = 16000, seed: int = 0) -> Waveform:
    """1/f-shaped noise via spectral weighting."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    weights = np.ones_like(freqs)
    weights[1:] = 1.0 / np.sqrt(freqs[1:])
    weights[0] = 0.0
    x = np.fft.irfft(spectrum * weights, n=n)
    return Waveform(x / np.max(np.abs(x)) * 0.5, sample_rate)


def babble_noise(duration: float, sample_rate: int = 16000, seed: int = 0,
                 num_talkers: int = 6) -> Waveform:
    """Overlapping synthetic talkers."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    out = np.zeros(n)
    for _ in range(num_talkers):
        talker = synthetic_speech(duration, sample_rate, seed=int(rng.integers(1 << 31)))
        out += talker.samples[:n]
    return Waveform(out / np.max(np.abs(out)) * 0.5, sample_rate)


_NOISE_KINDS = {
    "white": white_noise,
    "pink": pink_noise,
    "babble": babble_noise,
}


def synthetic_noise(kind: str, duration: float, sample_rate: int = 16000,
                    seed: int = 0) -> Waveform:
    try:
        maker = _NOISE_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown noise kind {kind!r}; choose from {sorted(_NOISE_KINDS)}")
    return maker(duration, sample_rate, seed)


def mix_at_snr(clean: Waveform, noise: Waveform, snr_db: float) -> Waveform:
    """clean + scaled noise, with the scale set so the clean-to-noise
    energy ratio over the overlap equals `snr_db`."""
    if clean.sample_rate != noise.sample_rate:
        raise ValueError("sample rates differ")
    n = min(len(clean), len(noise))
    c, v = clean.samples[:n], noise.samples[:n]
    ce, ve = float(np.sum(c**2)), float(np.sum(v**2))
    if ce == 0.0 or ve == 0.0:
        raise ValueError("silent input; SNR undefined")
    gain = np.sqrt(ce / (ve * 10.0 ** (snr_db / 10.0)))
    return Waveform(c + gain * v, clean.sample_rate)
