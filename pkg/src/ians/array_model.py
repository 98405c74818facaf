"""Two-element array geometry: steering vectors, orthogonal-complement
projection, and null-steering beamformer weights.

The weight rule places an exact spatial zero at the null angle while
holding (near-)unity gain at the steer angle. Per frequency bin k:

    w[k] = P[k] a_d[k] / max(a_d[k]^H P[k] a_d[k], epsilon)

where P[k] projects onto the subspace orthogonal to the null steering
vector and epsilon guards the 0/0 bins (DC, and null == steer).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ians.dsp import StftConfig

#: Division guard for degenerate bins (half of float64 machine epsilon).
DEFAULT_EPSILON = 1.11e-16


@dataclass(frozen=True)
class ArrayGeometry:
    """Inter-microphone spacing and sound speed, SI units."""

    spacing: float = 0.008
    sound_speed: float = 343.0

    def __post_init__(self):
        if self.spacing <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.sound_speed <= 0:
            raise ValueError(f"sound_speed must be positive, got {self.sound_speed}")

    def phase_shift(self, angle_deg: float, omega) -> np.ndarray:
        """Phase lag (radians) of mic 2 relative to mic 1 for a far-field
        source at `angle_deg` from the array axis (0 deg = endfire)."""
        tau = self.spacing / self.sound_speed * np.cos(np.radians(angle_deg))
        return np.asarray(omega, dtype=np.float64) * tau


def steering_vector(angle_deg: float, omega: float, geom: ArrayGeometry) -> np.ndarray:
    """Far-field steering vector [1, exp(-j*omega*spacing*cos(angle)/c)]."""
    _check_angle(angle_deg)
    return np.array([1.0, np.exp(-1j * geom.phase_shift(angle_deg, omega))])


def projection_matrix(phi_deg: float, omega: float, geom: ArrayGeometry) -> np.ndarray:
    """2x2 projector onto the subspace orthogonal to the null steering vector."""
    a = steering_vector(phi_deg, omega, geom)
    return np.eye(2, dtype=np.complex128) - np.outer(a, a.conj()) / 2.0


@dataclass(frozen=True)
class BeamWeights:
    """Per-bin weight 2-vectors of one null-steering beamformer.

    `per_bin[k]` nulls arrivals from `phi` exactly and passes arrivals
    from `theta_d` with unity gain wherever the bin is non-degenerate.
    Stored in extended precision so the null survives the huge weight
    norms the rule produces at near-degenerate low-frequency bins; use
    `per_bin_c128` for the signal path.
    """

    theta_d: float
    phi: float
    per_bin: np.ndarray
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        per_bin = np.asarray(self.per_bin)
        if per_bin.dtype != np.clongdouble:
            per_bin = per_bin.astype(np.clongdouble)
        if per_bin.ndim != 2 or per_bin.shape[1] != 2:
            raise ValueError(f"expected (K, 2) weights, got shape {per_bin.shape}")
        if not np.all(np.isfinite(per_bin)):
            raise ValueError("beam weights contain non-finite entries")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        per_bin.setflags(write=False)
        object.__setattr__(self, "per_bin", per_bin)

    @property
    def num_bins(self) -> int:
        return self.per_bin.shape[0]

    @property
    def per_bin_c128(self) -> np.ndarray:
        return self.per_bin.astype(np.complex128)


def _check_angle(angle_deg: float) -> None:
    if not 0.0 <= angle_deg <= 180.0:
        raise ValueError(f"angle must lie in [0, 180] degrees, got {angle_deg}")


def nsbf_weights(
    theta_d: float,
    phi: float,
    geom: ArrayGeometry = ArrayGeometry(),
    cfg: StftConfig = StftConfig(),
    sample_rate: int = 16000,
    epsilon: float = DEFAULT_EPSILON,
) -> BeamWeights:
    """Null-steering weights for every one-sided bin of `cfg`.

    Evaluated through the rank-one factorization of the projector: with
    v[k] = [-conj(p_k), 1] spanning the orthogonal complement of the null
    steering vector [1, p_k],

        P[k] a_d[k]           = v[k] * (d_k - p_k) / 2
        a_d[k]^H P[k] a_d[k]  = |d_k - p_k|^2 / 2

    so the numerator (and hence w[k]) is exactly zero at DC and whenever
    phi == theta_d, instead of leaving a residual at rounding scale. The
    algebra runs in long-double precision seeded from the double-precision
    steering phasors: the produced weights then annihilate the steering
    vectors other code computes, even at bins where the weight norm is
    1e5 or more. (On platforms whose long double is only 64 bits wide the
    null degrades to double-rounding scale.)
    """
    _check_angle(theta_d)
    _check_angle(phi)
    omega = cfg.bin_frequencies(sample_rate)
    d = np.exp(-1j * geom.phase_shift(theta_d, omega)).astype(np.clongdouble)
    p = np.exp(-1j * geom.phase_shift(phi, omega)).astype(np.clongdouble)
    g = d - p
    form = 0.5 * (g.real * g.real + g.imag * g.imag)
    s = g / (2.0 * np.maximum(form, np.longdouble(epsilon)))
    per_bin = np.stack([-np.conj(p) * s, s], axis=-1)
    return BeamWeights(theta_d=theta_d, phi=phi, per_bin=per_bin, epsilon=epsilon)


def response(weights: BeamWeights, angle_deg: float, geom: ArrayGeometry,
             cfg: StftConfig = StftConfig(), sample_rate: int = 16000) -> np.ndarray:
    """Per-bin complex gain w[k]^H a(angle)[k] of the beamformer."""
    omega = cfg.bin_frequencies(sample_rate)
    a1 = np.exp(-1j * geom.phase_shift(angle_deg, omega))
    w = weights.per_bin
    return (np.conj(w[:, 0]) + np.conj(w[:, 1]) * a1).astype(np.complex128)


def write_weights_csv(path, weights: BeamWeights, cfg: StftConfig = StftConfig(),
                      sample_rate: int = 16000) -> None:
    """Dump the weight table for debugging: one row per bin."""
    freqs = np.arange(weights.num_bins) * sample_rate / cfg.fft_len
    per_bin = weights.per_bin_c128
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin", "freq_hz", "w1_re", "w1_im", "w2_re", "w2_im"])
        for k in range(weights.num_bins):
            w1, w2 = per_bin[k]
            writer.writerow([k, f"{freqs[k]:.3f}",
                             repr(float(w1.real)), repr(float(w1.imag)),
                             repr(float(w2.real)), repr(float(w2.imag))])
