"""Shared signal plumbing: STFT analysis/synthesis, resampling, peak
normalization, and mono WAV I/O.

Everything here is a pure function of its inputs; the dataclasses are
immutable and safe to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.io import wavfile
from scipy.signal import get_window, resample_poly


class WindowKind(str, Enum):
    HAMMING = "hamming"
    HANN = "hann"


@dataclass(frozen=True)
class Waveform:
    """A mono time-domain signal. Samples are float64, nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"expected a 1-D signal, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    @property
    def is_silent(self) -> bool:
        return len(self) == 0 or float(np.max(np.abs(self.samples))) == 0.0

    def trimmed(self, num_samples: int) -> "Waveform":
        """First `num_samples` samples as a new waveform."""
        return Waveform(self.samples[:num_samples].copy(), self.sample_rate)


@dataclass(frozen=True)
class StftConfig:
    """Analysis/synthesis framing. Defaults: 512-sample Hamming, 50% overlap."""

    window_len: int = 512
    hop: int = 256
    window_kind: WindowKind = WindowKind.HAMMING
    fft_len: int = 512

    def __post_init__(self):
        if not (0 < self.hop <= self.window_len <= self.fft_len):
            raise ValueError(
                f"need 0 < hop <= window_len <= fft_len, got "
                f"hop={self.hop} window_len={self.window_len} fft_len={self.fft_len}"
            )

    @property
    def num_bins(self) -> int:
        return self.fft_len // 2 + 1

    def window(self) -> np.ndarray:
        # Periodic variant: the right choice for overlap-added analysis frames.
        return get_window(self.window_kind.value, self.window_len, fftbins=True)

    def bin_frequencies(self, sample_rate: int) -> np.ndarray:
        """Angular frequency (rad/s) of each one-sided bin."""
        k = np.arange(self.num_bins)
        return 2.0 * np.pi * k * sample_rate / self.fft_len


@dataclass(frozen=True)
class Spectrogram:
    """One-sided complex STFT matrix, N time frames by K frequency bins."""

    data: np.ndarray
    config: StftConfig
    sample_rate: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.ndim != 2:
            raise ValueError(f"expected a 2-D STFT matrix, got shape {data.shape}")
        if data.shape[1] != self.config.num_bins:
            raise ValueError(
                f"bin count {data.shape[1]} inconsistent with fft_len "
                f"{self.config.fft_len} (expected {self.config.num_bins})"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("spectrogram contains non-finite entries")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def num_frames(self) -> int:
        return self.data.shape[0]

    @property
    def num_bins(self) -> int:
        return self.data.shape[1]

    def magnitude(self) -> np.ndarray:
        return np.abs(self.data)


def _frame_count(num_samples: int, cfg: StftConfig) -> int:
    # Frames start every `hop` samples; the tail is zero-padded so the last
    # frame is complete and no sample is dropped.
    return math.ceil(max(num_samples - cfg.window_len, 0) / cfg.hop) + 1


def stft(x: Waveform, cfg: StftConfig = StftConfig()) -> Spectrogram:
    """Short-time Fourier transform, one-sided spectrum."""
    if len(x) == 0:
        raise ValueError("cannot take the STFT of an empty signal")
    n_frames = _frame_count(len(x), cfg)
    padded_len = (n_frames - 1) * cfg.hop + cfg.window_len
    padded = np.zeros(padded_len)
    padded[: len(x)] = x.samples
    idx = np.arange(cfg.window_len)[None, :] + cfg.hop * np.arange(n_frames)[:, None]
    frames = padded[idx] * cfg.window()[None, :]
    data = np.fft.rfft(frames, n=cfg.fft_len, axis=1)
    return Spectrogram(data, cfg, x.sample_rate)


def istft(S: Spectrogram) -> Waveform:
    """Weighted overlap-add synthesis with window-sum normalization.

    Output length is the padded analysis length, (N-1)*hop + window_len;
    callers trim to taste. Round-trips stft() to float precision wherever
    the squared-window sum is nonzero.
    """
    cfg = S.config
    window = cfg.window()
    frames = np.fft.irfft(S.data, n=cfg.fft_len, axis=1)[:, : cfg.window_len]
    n_frames = S.num_frames
    out_len = (n_frames - 1) * cfg.hop + cfg.window_len
    y = np.zeros(out_len)
    wsum = np.zeros(out_len)
    wsq = window * window
    for i in range(n_frames):
        start = i * cfg.hop
        y[start : start + cfg.window_len] += frames[i] * window
        wsum[start : start + cfg.window_len] += wsq
    tiny = np.finfo(np.float64).tiny
    dead = wsum <= tiny
    if np.any(dead[cfg.window_len : max(out_len - cfg.window_len, cfg.window_len)]):
        raise ValueError("synthesis window sum vanishes at an interior sample")
    y = np.where(dead, 0.0, y / np.where(dead, 1.0, wsum))
    return Waveform(y, S.sample_rate)


def peak_normalize(x: Waveform) -> Waveform:
    """Scale so the largest absolute sample is 1. Silent input is returned
    unchanged (check ``is_silent`` on the result)."""
    if len(x) == 0:
        raise ValueError("cannot normalize an empty signal")
    peak = float(np.max(np.abs(x.samples)))
    if peak == 0.0:
        return x
    return Waveform(x.samples / peak, x.sample_rate)


def resample(x: Waveform, target_rate: int) -> Waveform:
    """Polyphase resampling. Output length is round(len * target / source)."""
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == x.sample_rate:
        return x
    g = math.gcd(target_rate, x.sample_rate)
    up, down = target_rate // g, x.sample_rate // g
    y = resample_poly(x.samples, up, down)
    target_len = int(math.floor(len(x) * target_rate / x.sample_rate + 0.5))
    if len(y) > target_len:
        y = y[:target_len]
    elif len(y) < target_len:
        y = np.pad(y, (0, target_len - len(y)))
    return Waveform(y, target_rate)


def read_wav(path) -> Waveform:
    """Read a mono WAV (PCM16 or IEEE float); multichannel input is averaged."""
    rate, data = wavfile.read(path)
    if data.ndim == 2:
        data = data.mean(axis=1)
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"unsupported WAV sample format: {data.dtype}")
    return Waveform(samples, int(rate))


def write_wav(path, x: Waveform, pcm16: bool = False) -> None:
    """Write a mono WAV as IEEE float32 (default) or PCM16."""
    if pcm16:
        scaled = np.clip(np.round(x.samples * 32768.0), -32768, 32767)
        wavfile.write(path, x.sample_rate, scaled.astype(np.int16))
    else:
        wavfile.write(path, x.sample_rate, x.samples.astype(np.float32))
