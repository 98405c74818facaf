"""The ians-scorer-v1 request loop.

Handshake line first, then one JSON response per JSON request, in request
order, until stdin closes. Per-request trouble (unreadable WAV, silent
audio) is reported as {"id": ..., "error": ...} and the loop keeps
serving; only a malformed control line is fatal.
"""
from __future__ import annotations

import json
import sys

import numpy as np

from stoinet_plugin.features import features_from_wav, read_wav_mono

PROTOCOL_NAME = "ians-scorer-v1"


class StubScorer:
    """Model-free scoring for protocol tests: a constant, or the RMS of
    the raw waveform."""

    def __init__(self, mode: str, value: float = 0.5):
        if mode not in ("rms", "const"):
            raise ValueError(f"unknown stub mode {mode!r}")
        self.mode = mode
        self.value = value

    def score_wav(self, path: str) -> float:
        if self.mode == "const":
            return self.value
        samples, _ = read_wav_mono(path)
        return float(np.sqrt(np.mean(samples**2)))


class CheckpointScorer:
    """Full path: waveform -> peak-normalized magnitude STFT -> frame
    scores -> global average, clipped to [0, 1]."""

    def __init__(self, checkpoint_path: str):
        from stoinet_plugin.model import ModelScorer  # defer the torch import

        self._model = ModelScorer(checkpoint_path)

    def score_wav(self, path: str) -> float:
        return self._model.score_features(features_from_wav(path))


def serve(scorer, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    def emit(payload: dict) -> None:
        stdout.write(json.dumps(payload) + "\n")
        stdout.flush()

    emit({"protocol": PROTOCOL_NAME})
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        req_id = request.get("id")
        try:
            score = scorer.score_wav(request["wav_path"])
            if not np.isfinite(score):
                raise ValueError("score is not finite")
            emit({"id": req_id, "score": float(np.clip(score, 0.0, 1.0))})
        except Exception as exc:
            emit({"id": req_id, "error": str(exc)})
    return 0
