"""Stage-2 scoring: a common interface over the intrusive oracle metric
(clean reference in hand) and external non-intrusive scorer plugins.

Plugins are child processes speaking line-delimited JSON on stdio:

    handshake (plugin -> host, once):  {"protocol": "ians-scorer-v1"}
    request   (host -> plugin):        {"id": <int>, "wav_path": "<abs path>"}
    response  (plugin -> host):        {"id": <int>, "score": <float>}

Candidates are handed over as 16 kHz float32 mono WAV files; the host
closes the plugin's stdin to shut it down.
"""
from __future__ import annotations

import json
import math
import os
import queue
import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ians.dsp import Waveform, write_wav
from ians.stoi import stoi

PROTOCOL_NAME = "ians-scorer-v1"


class ScorerKind(str, Enum):
    ORACLE = "oracle"
    PLUGIN = "plugin"


class ScorerError(RuntimeError):
    """A scorer failed; `index` names the offending candidate if known."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class ScoreVector:
    """Per-candidate scores aligned with the null-angle grid. Silent
    candidates carry -inf and are never selected."""

    scores: np.ndarray
    scorer_kind: ScorerKind

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 1:
            raise ValueError("scores must be a 1-D vector")
        if np.any(np.isnan(scores)) or np.any(scores == np.inf):
            raise ValueError("scores must be finite or -inf")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return self.scores.shape[0]

    @property
    def best_index(self) -> int:
        return int(np.argmax(self.scores))


@dataclass(frozen=True)
class ScorerSpec:
    """Which scorer to run: the oracle needs the clean reference, the
    plugin needs a command line."""

    kind: ScorerKind
    reference: Waveform | None = None
    plugin_cmd: str | None = None
    plugin_timeout: float = 30.0

    def __post_init__(self):
        if self.kind == ScorerKind.ORACLE:
            if self.reference is None:
                raise ValueError("oracle scorer needs a clean reference waveform")
            if self.plugin_cmd is not None:
                raise ValueError("oracle scorer takes no plugin command")
        else:
            if self.plugin_cmd is None:
                raise ValueError("plugin scorer needs a command line")
            if self.reference is not None:
                raise ValueError("plugin scorer takes no reference")


def score_oracle(candidate: Waveform, reference: Waveform) -> float:
    """True intelligibility of the candidate against the clean reference;
    lengths are reconciled by truncation to the shorter one."""
    n = min(len(candidate), len(reference))
    return stoi(reference.trimmed(n), candidate.trimmed(n))


class PluginHandle:
    """One running scorer plugin. Requests are serialized; responses must
    echo the request id and arrive within the timeout."""

    def __init__(self, cmd: str, timeout: float = 30.0, handshake_timeout: float = 30.0):
        self.timeout = timeout
        self._proc = subprocess.Popen(
            shlex.split(cmd),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self._next_id = 0
        # process startup is not request latency; give the handshake its own budget
        try:
            handshake = self._read_line(max(handshake_timeout, timeout))
        except ScorerError as exc:
            self.close()
            raise ScorerError(f"plugin handshake failed: {exc}") from exc
        if handshake.get("protocol") != PROTOCOL_NAME:
            self.close()
            raise ScorerError(
                f"plugin handshake missing or wrong: expected protocol "
                f"{PROTOCOL_NAME!r}, got {handshake!r}"
            )

    def _pump(self):
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF sentinel

    def _read_line(self, timeout: float) -> dict:
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise ScorerError(f"plugin response timed out after {timeout:.1f} s")
        if line is None:
            raise ScorerError("plugin closed its output stream")
        try:
            payload = json.loads(line)
        except json.JSONDecodeError:
            raise ScorerError(f"plugin wrote a non-JSON line: {line!r}")
        if not isinstance(payload, dict):
            raise ScorerError(f"plugin wrote a non-object line: {line!r}")
        return payload

    def score_path(self, wav_path: str) -> float:
        req_id = self._next_id
        self._next_id += 1
        if self._proc.poll() is not None:
            raise ScorerError("plugin process has exited")
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(
                json.dumps({"id": req_id, "wav_path": os.path.abspath(wav_path)}) + "\n"
            )
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ScorerError(f"could not reach the plugin: {exc}")
        response = self._read_line(self.timeout)
        if response.get("id") != req_id:
            raise ScorerError(
                f"plugin answered id {response.get('id')!r} to request {req_id}"
            )
        if "error" in response:
            raise ScorerError(f"plugin error: {response['error']}")
        score = response.get("score")
        if not isinstance(score, (int, float)) or not math.isfinite(score):
            raise ScorerError(f"plugin returned a non-finite score: {score!r}")
        return float(score)

    def score_waveform(self, candidate: Waveform) -> float:
        with tempfile.TemporaryDirectory(prefix="ians-scorer-") as tmp:
            path = os.path.join(tmp, "candidate.wav")
            write_wav(path, candidate)
            return self.score_path(path)

    def close(self) -> None:
        if self._proc.stdin is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
        try:
            self._proc.wait(timeout=5.0)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def __enter__(self) -> "PluginHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def score_plugin(candidate: Waveform, plugin: PluginHandle) -> float:
    """Hand one candidate to a running plugin and return its score."""
    return plugin.score_waveform(candidate)


def score_all(candidates: list, spec: ScorerSpec) -> ScoreVector:
    """Score every candidate in grid order. Silent candidates get -inf
    without touching the scorer; any scorer failure aborts with the index
    of the candidate that caused it."""
    scores = np.full(len(candidates), -np.inf)
    plugin = None
    try:
        if spec.kind == ScorerKind.PLUGIN:
            plugin = PluginHandle(spec.plugin_cmd, timeout=spec.plugin_timeout)
        for i, candidate in enumerate(candidates):
            if candidate.is_silent:
                continue
            try:
                if spec.kind == ScorerKind.ORACLE:
                    scores[i] = score_oracle(candidate, spec.reference)
                else:
                    scores[i] = score_plugin(candidate, plugin)
            except ScorerError as exc:
                raise ScorerError(f"candidate {i}: {exc}", index=i) from exc
            except ValueError as exc:
                raise ScorerError(f"candidate {i}: {exc}", index=i) from exc
    finally:
        if plugin is not None:
            plugin.close()
    return ScoreVector(scores=scores, scorer_kind=spec.kind)
