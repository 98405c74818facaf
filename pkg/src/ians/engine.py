"""The end-to-end enhancement pipeline: beamform a candidate per grid
angle, score every candidate, return the argmax. Also the dual steer-angle
variant and the known-DOA baseline beamformer.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ians.array_model import nsbf_weights
from ians.candidates import (
    AngleGrid,
    apply_beamformer,
    candidates_to_time,
    generate_candidates,
)
from ians.dsp import StftConfig, Waveform, istft, stft
from ians.room import StereoCapture
from ians.scoring import ScorerKind, ScorerSpec, ScoreVector, score_all


@dataclass(frozen=True)
class IansResult:
    """Winning null angle with the full per-angle diagnostics.

    `output` is the un-normalized inverse transform of the winning
    candidate; peak normalization only ever happens on the scorer path.
    """

    phi_star: float
    phi_index: int
    score_vector: ScoreVector
    output: Waveform
    psi: float
    scorer_kind: ScorerKind
    grid: AngleGrid

    @property
    def best_score(self) -> float:
        return float(self.score_vector.scores[self.phi_index])

    def to_json_dict(self, output_wav_path: str | None = None) -> dict:
        payload = {
            "phi_star": self.phi_star,
            "psi": self.psi,
            "scorer": self.scorer_kind.value,
            "scores": [
                {"angle": float(a), "score": float(s)}
                for a, s in zip(self.grid.angles, self.score_vector.scores)
            ],
        }
        if output_wav_path is not None:
            payload["output_wav_path"] = output_wav_path
        return payload


def run_ians(
    capture: StereoCapture,
    psi: float,
    grid: AngleGrid = AngleGrid(),
    spec: ScorerSpec | None = None,
    cfg: StftConfig = StftConfig(),
) -> IansResult:
    """Full sweep: transform both channels, beamform per grid angle, score
    each candidate, keep the best (ties break toward the lowest index)."""
    if spec is None:
        raise ValueError("a scorer spec is required")
    X1 = stft(capture.ch1, cfg)
    X2 = stft(capture.ch2, cfg)
    cs = generate_candidates(X1, X2, psi, grid, capture.geometry)
    time_candidates = candidates_to_time(cs)
    scores = score_all(time_candidates, spec)
    if not np.any(np.isfinite(scores.scores)):
        raise ValueError("every candidate is silent; nothing to select")
    best = scores.best_index
    output = istft(cs.candidates[best]).trimmed(len(capture.ch1))
    return IansResult(
        phi_star=float(grid.angles[best]),
        phi_index=best,
        score_vector=scores,
        output=output,
        psi=psi,
        scorer_kind=spec.kind,
        grid=grid,
    )


def run_ians_dual(
    capture: StereoCapture,
    psi1: float,
    psi2: float,
    grid: AngleGrid = AngleGrid(),
    spec: ScorerSpec | None = None,
    cfg: StftConfig = StftConfig(),
) -> IansResult:
    """Run the sweep for two steer angles (insurance against the steer
    angle landing on the interferer) and keep the run whose own maximum
    score is higher; ties go to `psi1`."""
    if psi1 == psi2:
        raise ValueError("the two steer angles must differ")
    first = run_ians(capture, psi1, grid, spec, cfg)
    second = run_ians(capture, psi2, grid, spec, cfg)
    return first if first.best_score >= second.best_score else second


def run_t_nsbf(
    capture: StereoCapture,
    theta_s: float,
    theta_i: float,
    cfg: StftConfig = StftConfig(),
) -> Waveform:
    """Baseline with the true DOAs handed over: steer at the speech,
    null the interferer, no search."""
    X1 = stft(capture.ch1, cfg)
    X2 = stft(capture.ch2, cfg)
    w = nsbf_weights(theta_s, theta_i, capture.geometry, cfg, capture.sample_rate)
    return istft(apply_beamformer(w, X1, X2)).trimmed(len(capture.ch1))
