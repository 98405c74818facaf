"""Waveform ingestion matching the assessment model's training convention:
peak-normalized time signal, then a centered magnitude STFT with a
512-point periodic Hamming window and 50% overlap."""
from __future__ import annotations

import numpy as np
from scipy.io import wavfile
from scipy.signal import get_window

N_FFT = 512
HOP = 256


def read_wav_mono(path) -> tuple:
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
    if samples.size == 0:
        raise ValueError("empty WAV file")
    return samples, int(rate)


def peak_normalize(x: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(x))
    if peak == 0.0:
        raise ValueError("silent waveform; nothing to score")
    return x / peak


def magnitude_spectrogram(x: np.ndarray) -> np.ndarray:
    """(frames, 257) magnitude feature matrix, frames centered on
    hop-spaced instants with reflection padding at the edges."""
    pad = N_FFT // 2
    if len(x) <= pad:
        raise ValueError("waveform too short for analysis")
    padded = np.pad(x, pad, mode="reflect")
    n_frames = 1 + len(x) // HOP
    window = get_window("hamming", N_FFT, fftbins=True)
    idx = np.arange(N_FFT)[None, :] + HOP * np.arange(n_frames)[:, None]
    frames = padded[idx] * window[None, :]
    return np.abs(np.fft.rfft(frames, n=N_FFT, axis=1)).astype(np.float32)


def features_from_wav(path) -> np.ndarray:
    samples, _ = read_wav_mono(path)
    return magnitude_spectrogram(peak_normalize(samples))
