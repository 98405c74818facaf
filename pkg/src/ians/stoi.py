"""Intrusive short-time intelligibility metric.

Maps a (clean, degraded) pair to [0, 1] by correlating their one-third
octave band envelopes over short segments: resample to 10 kHz, drop the
frames where the clean signal is silent, analyze with 256-sample Hann
frames at 50% overlap (512-point FFT), group bins into 15 one-third
octave bands from 150 Hz, then for every band and 30-frame segment
normalize and clip the degraded envelope and correlate it with the clean
one. The score is the average correlation, clamped to [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ians.dsp import Spectrogram, StftConfig, Waveform, WindowKind, resample

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class StoiConfig:
    """The standard parameterization; fixed unless you know better."""

    internal_rate: int = 10000
    frame_len: int = 256
    hop: int = 128
    fft_len: int = 512
    num_bands: int = 15
    lowest_center: float = 150.0
    segment_len: int = 30
    clip_db: float = -15.0
    silence_range_db: float = 40.0


DEFAULT_STOI_CONFIG = StoiConfig()


def _analysis_window(frame_len: int) -> np.ndarray:
    # Endpoint-free Hann, the convention of the reference metric
    return np.hanning(frame_len + 2)[1:-1]


def _frame_starts(num_samples: int, frame_len: int, hop: int) -> np.ndarray:
    if num_samples < frame_len:
        return np.empty(0, dtype=np.int64)
    return np.arange(0, num_samples - frame_len + 1, hop, dtype=np.int64)


def _frames(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    starts = _frame_starts(len(x), frame_len, hop)
    idx = starts[:, None] + np.arange(frame_len)[None, :]
    return x[idx]


def remove_silence(clean: Waveform, degraded: Waveform,
                   cfg: StoiConfig = DEFAULT_STOI_CONFIG) -> tuple:
    """Drop the frames whose clean-signal energy falls more than
    `silence_range_db` below the loudest frame, from BOTH signals, and
    overlap-add what remains. Frame selection looks at the clean signal
    only."""
    if clean.sample_rate != degraded.sample_rate:
        raise ValueError("sample rates differ")
    if len(clean) != len(degraded):
        raise ValueError("lengths differ; truncate before silence removal")
    if clean.is_silent:
        raise ValueError("clean signal is silent everywhere")
    window = _analysis_window(cfg.frame_len)
    x_frames = _frames(clean.samples, cfg.frame_len, cfg.hop) * window
    if x_frames.shape[0] == 0:
        raise ValueError("signal shorter than one analysis frame")
    y_frames = _frames(degraded.samples, cfg.frame_len, cfg.hop) * window
    energies = 20.0 * np.log10(np.linalg.norm(x_frames, axis=1) + _EPS)
    mask = energies > energies.max() - cfg.silence_range_db
    x_frames, y_frames = x_frames[mask], y_frames[mask]
    n_kept = x_frames.shape[0]
    out_len = (n_kept - 1) * cfg.hop + cfg.frame_len
    x_out = np.zeros(out_len)
    y_out = np.zeros(out_len)
    for i in range(n_kept):
        start = i * cfg.hop
        x_out[start : start + cfg.frame_len] += x_frames[i]
        y_out[start : start + cfg.frame_len] += y_frames[i]
    fs = clean.sample_rate
    return Waveform(x_out, fs), Waveform(y_out, fs)


def _band_matrix(cfg: StoiConfig) -> np.ndarray:
    """Binary (num_bands, num_bins) matrix selecting the FFT bins of each
    one-third octave band; edges at +-1/6 octave snap to the nearest bin."""
    num_bins = cfg.fft_len // 2 + 1
    f = np.linspace(0.0, cfg.internal_rate, cfg.fft_len + 1)[:num_bins]
    j = np.arange(cfg.num_bands, dtype=np.float64)
    low = cfg.lowest_center * 2.0 ** ((2.0 * j - 1.0) / 6.0)
    high = cfg.lowest_center * 2.0 ** ((2.0 * j + 1.0) / 6.0)
    obm = np.zeros((cfg.num_bands, num_bins))
    for b in range(cfg.num_bands):
        lo_bin = int(np.argmin(np.square(f - low[b])))
        hi_bin = int(np.argmin(np.square(f - high[b])))
        obm[b, lo_bin:hi_bin] = 1.0
    return obm


def third_octave_energies(S: Spectrogram, cfg: StoiConfig = DEFAULT_STOI_CONFIG) -> np.ndarray:
    """Per-frame one-third octave band envelope, sqrt of summed bin power.
    Expects a one-sided spectrogram at the metric's internal rate and FFT
    length."""
    if S.sample_rate != cfg.internal_rate:
        raise ValueError(
            f"expected a {cfg.internal_rate} Hz spectrogram, got {S.sample_rate} Hz"
        )
    if S.config.fft_len != cfg.fft_len:
        raise ValueError(
            f"expected fft_len {cfg.fft_len}, got {S.config.fft_len}"
        )
    obm = _band_matrix(cfg)
    power = np.abs(S.data) ** 2
    return np.sqrt(power @ obm.T)


def _metric_stft(x: Waveform, cfg: StoiConfig) -> Spectrogram:
    window = _analysis_window(cfg.frame_len)
    frames = _frames(x.samples, cfg.frame_len, cfg.hop) * window
    data = np.fft.rfft(frames, n=cfg.fft_len, axis=1)
    meta = StftConfig(window_len=cfg.frame_len, hop=cfg.hop,
                      window_kind=WindowKind.HANN, fft_len=cfg.fft_len)
    return Spectrogram(data, meta, x.sample_rate)


def stoi(clean: Waveform, degraded: Waveform,
         cfg: StoiConfig = DEFAULT_STOI_CONFIG) -> float:
    """Intelligibility score of `degraded` against the clean reference."""
    if clean.sample_rate != degraded.sample_rate:
        raise ValueError("sample rates differ")
    hop_at_input = max(1, round(cfg.hop * clean.sample_rate / cfg.internal_rate))
    if abs(len(clean) - len(degraded)) > hop_at_input:
        raise ValueError(
            f"length mismatch {len(clean)} vs {len(degraded)} exceeds one hop; "
            "align the signals first"
        )
    n = min(len(clean), len(degraded))
    clean = clean.trimmed(n)
    degraded = degraded.trimmed(n)
    if clean.is_silent:
        raise ValueError("clean signal is silent")

    x = resample(clean, cfg.internal_rate)
    y = resample(degraded, cfg.internal_rate)
    x, y = remove_silence(x, y, cfg)

    xb = third_octave_energies(_metric_stft(x, cfg), cfg)
    yb = third_octave_energies(_metric_stft(y, cfg), cfg)
    n_frames = xb.shape[0]
    if n_frames < cfg.segment_len:
        raise ValueError(
            f"only {n_frames} frames after silence removal; "
            f"need at least {cfg.segment_len}"
        )

    # sliding segments: (n_segments, num_bands, segment_len)
    xs = np.lib.stride_tricks.sliding_window_view(xb, cfg.segment_len, axis=0)
    ys = np.lib.stride_tricks.sliding_window_view(yb, cfg.segment_len, axis=0)

    x_norm = np.linalg.norm(xs, axis=2, keepdims=True)
    y_norm = np.linalg.norm(ys, axis=2, keepdims=True)
    alpha = np.where(y_norm > 0.0, x_norm / np.where(y_norm > 0.0, y_norm, 1.0), 0.0)
    clip_gain = 1.0 + 10.0 ** (-cfg.clip_db / 20.0)
    y_clipped = np.minimum(ys * alpha, xs * clip_gain)

    x0 = xs - xs.mean(axis=2, keepdims=True)
    y0 = y_clipped - y_clipped.mean(axis=2, keepdims=True)
    num = np.sum(x0 * y0, axis=2)
    denom = np.linalg.norm(x0, axis=2) * np.linalg.norm(y0, axis=2)
    corr = np.where(denom > 0.0, num / np.where(denom > 0.0, denom, 1.0), 0.0)
    return float(np.clip(corr.mean(), 0.0, 1.0))
