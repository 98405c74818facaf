"""Stage 1 of the enhancement pipeline: sweep a bank of null-steering
beamformers over the null-angle grid and collect the candidate outputs.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ians.array_model import ArrayGeometry, BeamWeights, nsbf_weights
from ians.dsp import Spectrogram, Waveform, istft, peak_normalize, write_wav


def _canon(angle_deg: float) -> int:
    # one-decimal-degree canonicalization for exact grid membership
    return int(round(float(angle_deg) * 10.0))


@dataclass(frozen=True)
class AngleGrid:
    """Ordered null-angle grid in degrees. Default: 0, 2, ..., 180."""

    angles: np.ndarray = field(default_factory=lambda: np.arange(0.0, 180.1, 2.0))

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=np.float64)
        if angles.ndim != 1 or angles.size < 2:
            raise ValueError("grid needs at least two angles")
        if np.any(np.diff(angles) <= 0):
            raise ValueError("grid angles must be strictly increasing")
        if angles[0] < 0.0 or angles[-1] > 180.0:
            raise ValueError("grid angles must lie in [0, 180] degrees")
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)

    @classmethod
    def with_step(cls, step_deg: float) -> "AngleGrid":
        return cls(np.arange(0.0, 180.0 + step_deg / 2, step_deg))

    def __len__(self) -> int:
        return self.angles.size

    def index_of(self, angle_deg: float) -> int | None:
        """Index of an exactly-matching grid angle, to 0.1 deg, else None."""
        target = _canon(angle_deg)
        for i, a in enumerate(self.angles):
            if _canon(a) == target:
                return i
        return None


@dataclass(frozen=True)
class CandidateSet:
    """The P beamformed STFT candidates, aligned with the grid."""

    candidates: tuple
    psi: float
    grid: AngleGrid
    passthrough_index: int | None = None

    def __post_init__(self):
        candidates = tuple(self.candidates)
        if len(candidates) != len(self.grid):
            raise ValueError(
                f"{len(candidates)} candidates for a {len(self.grid)}-angle grid"
            )
        shapes = {c.data.shape for c in candidates}
        if len(shapes) != 1:
            raise ValueError(f"candidates disagree on shape: {shapes}")
        object.__setattr__(self, "candidates", candidates)

    def __len__(self) -> int:
        return len(self.candidates)


def apply_beamformer(w: BeamWeights, X1: Spectrogram, X2: Spectrogram) -> Spectrogram:
    """Filter-and-sum: Y[n, k] = w[k]^H [X1[n, k], X2[n, k]]."""
    if X1.data.shape != X2.data.shape:
        raise ValueError(
            f"channel shapes differ: {X1.data.shape} vs {X2.data.shape}"
        )
    if X1.config != X2.config or X1.sample_rate != X2.sample_rate:
        raise ValueError("channel STFT configurations differ")
    if w.num_bins != X1.num_bins:
        raise ValueError(
            f"weights cover {w.num_bins} bins but spectrogram has {X1.num_bins}"
        )
    wc = w.per_bin_c128.conj()
    data = X1.data * wc[None, :, 0] + X2.data * wc[None, :, 1]
    return Spectrogram(data, X1.config, X1.sample_rate)


def generate_candidates(
    X1: Spectrogram,
    X2: Spectrogram,
    psi: float,
    grid: AngleGrid = AngleGrid(),
    geom: ArrayGeometry = ArrayGeometry(),
) -> CandidateSet:
    """Beamform the channel pair once per grid angle with the steer angle
    fixed at `psi`.

    When `psi` lands exactly on a grid angle the corresponding candidate
    is the reference channel itself, bit for bit, rather than the
    (all-zero) output of a beamformer whose null and steer coincide.
    """
    if not 0.0 <= psi <= 180.0:
        raise ValueError(f"psi must lie in [0, 180] degrees, got {psi}")
    passthrough = grid.index_of(psi)
    candidates = []
    for i, phi in enumerate(grid.angles):
        if i == passthrough:
            candidates.append(X1)
            continue
        w = nsbf_weights(psi, float(phi), geom, X1.config, X1.sample_rate)
        candidates.append(apply_beamformer(w, X1, X2))
    return CandidateSet(
        candidates=tuple(candidates),
        psi=psi,
        grid=grid,
        passthrough_index=passthrough,
    )


def candidates_to_time(cs: CandidateSet) -> list[Waveform]:
    """Inverse-transform every candidate and peak-normalize it for scoring.

    Silent candidates (possible when the null lands on the steer angle)
    come back unchanged; check ``is_silent`` on each entry.
    """
    return [peak_normalize(istft(c)) for c in cs.candidates]


def dump_candidate_wavs(directory, waves: list[Waveform], grid: AngleGrid) -> list[str]:
    """Write one WAV per candidate, filename encoding the null angle."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for wf, angle in zip(waves, grid.angles):
        path = os.path.join(directory, f"cand_phi_{int(round(angle)):03d}.wav")
        write_wav(path, wf)
        paths.append(path)
    return paths
