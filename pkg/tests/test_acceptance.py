"""Acceptance suite: one test per criterion, each printing a PASS line
with the measured values (run `pytest -s tests/test_acceptance.py` to see
them). Tolerances are fixed here, not calibrated elsewhere.
"""
import sys
import time

import numpy as np
import pytest

from ians.array_model import DEFAULT_EPSILON, nsbf_weights
from ians.candidates import AngleGrid
from ians.dsp import StftConfig, Waveform, istft, stft
from ians.engine import run_ians, run_t_nsbf
from ians.room import RoomScenario, plane_wave_capture, simulate_capture
from ians.scoring import (
    PluginHandle,
    ScorerError,
    ScorerKind,
    ScorerSpec,
    score_oracle,
    score_plugin,
)
from ians.signals import (
    babble_noise,
    mix_at_snr,
    synthetic_speech,
    white_noise,
)
from ians.stoi import stoi
from reference_stoi import reference_stoi

STUB = f"{sys.executable} -m ians.plugin_stub"
CFG = StftConfig()
FS = 16000
GEOM = RoomScenario().geometry
OMEGA = CFG.bin_frequencies(FS)


def _null_product(w, phi, k):
    a1 = np.exp(-1j * GEOM.phase_shift(phi, OMEGA[k]))
    return abs(np.conj(w.per_bin[k, 0]) + np.conj(w.per_bin[k, 1]) * a1)


def _gain_product(w, theta_d):
    d = np.exp(-1j * GEOM.phase_shift(theta_d, OMEGA))
    return np.conj(w.per_bin[:, 0]) + np.conj(w.per_bin[:, 1]) * d


def test_criterion_1_exact_null():
    """1000 random (theta_d, phi, bin) triples: |w^H a_phi| < 1e-12."""
    rng = np.random.default_rng(2024)
    start = time.monotonic()
    worst = 0.0
    for _ in range(1000):
        theta_d, phi = rng.uniform(0.0, 180.0, 2)
        k = int(rng.integers(0, CFG.num_bins))
        w = nsbf_weights(theta_d, phi, GEOM, CFG, FS)
        worst = max(worst, float(_null_product(w, phi, k)))
    elapsed = time.monotonic() - start
    assert worst < 1e-12
    assert elapsed < 1.0
    print(f"\n[PASS] criterion 1: exact null, worst |w^H a_phi| = {worst:.3e} "
          f"({elapsed:.2f} s)")


def test_criterion_2_unity_gain_and_degenerate_zeros():
    """Unity gain wherever the quadratic form exceeds epsilon; zero weights
    at DC and when the null angle equals the steer angle."""
    rng = np.random.default_rng(2025)
    start = time.monotonic()
    worst = 0.0
    for _ in range(200):
        theta_d, phi = rng.uniform(0.0, 180.0, 2)
        w = nsbf_weights(theta_d, phi, GEOM, CFG, FS)
        d = np.exp(-1j * GEOM.phase_shift(theta_d, OMEGA))
        p = np.exp(-1j * GEOM.phase_shift(phi, OMEGA))
        form = 0.5 * np.abs(d - p) ** 2
        live = form > DEFAULT_EPSILON
        gain = _gain_product(w, theta_d)
        if live.any():
            worst = max(worst, float(np.max(np.abs(gain[live] - 1.0))))
        assert np.all(w.per_bin[0] == 0)  # DC bin
    for angle in (0.0, 22.5, 80.0, 90.0, 137.2, 180.0):
        assert np.all(nsbf_weights(angle, angle, GEOM, CFG, FS).per_bin == 0)
    elapsed = time.monotonic() - start
    assert worst < 1e-9
    assert elapsed < 1.0
    print(f"[PASS] criterion 2: unity gain worst |w^H a_d - 1| = {worst:.3e}, "
          f"w = 0 at DC and phi = theta_d ({elapsed:.2f} s)")


def test_criterion_3_stft_round_trip():
    """50 random signals reconstruct on the interior below 1e-6."""
    rng = np.random.default_rng(2026)
    start = time.monotonic()
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(4 * CFG.window_len, 8 * CFG.window_len))
        x = rng.standard_normal(n)
        y = istft(stft(Waveform(x, FS), CFG))
        wl = CFG.window_len
        err = np.linalg.norm(y.samples[wl : n - wl] - x[wl : n - wl])
        err /= np.linalg.norm(x[wl : n - wl])
        worst = max(worst, float(err))
    elapsed = time.monotonic() - start
    assert worst < 1e-6
    assert elapsed < 5.0
    print(f"[PASS] criterion 3: round trip worst interior error = {worst:.3e} "
          f"({elapsed:.2f} s)")


def test_criterion_4_stoi_correctness():
    """Self-score, exact scale invariance, and cross-check against the
    independent reference implementation on 12 speech+noise pairs."""
    start = time.monotonic()
    rng = np.random.default_rng(2027)
    sp = synthetic_speech(2.0, FS, seed=301)
    assert stoi(sp, sp) >= 0.999

    nz = white_noise(2.0, FS, seed=302)
    deg = mix_at_snr(sp, nz, 0.0)
    base = stoi(sp, deg)
    for c in (0.25, 0.5, 2.0, 4.0):
        assert stoi(sp, Waveform(deg.samples * c, FS)) == base

    worst = 0.0
    for i in range(12):
        dur = float(rng.uniform(1.8, 3.0))
        clean = synthetic_speech(dur, FS, seed=400 + i)
        noise = (white_noise if i % 2 else babble_noise)(dur, FS, seed=500 + i)
        degraded = mix_at_snr(clean, noise, float(rng.uniform(-10.0, 12.0)))
        mine = stoi(clean, degraded)
        ref = reference_stoi(clean.samples, degraded.samples, FS)
        worst = max(worst, abs(mine - ref))
        assert abs(mine - ref) <= 0.01
    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    print(f"[PASS] criterion 4: self-score ok, scale-invariance exact, "
          f"cross-check worst |delta| = {worst:.4f} ({elapsed:.1f} s)")


def test_criterion_5_anechoic_doa_recovery():
    """Far-field speech at 90 deg, noise at 22.5 deg, SIR 0 dB, steer 0:
    the selected null lands within 4 deg of the interferer and beats the
    passthrough by at least 0.1."""
    start = time.monotonic()
    sp = synthetic_speech(2.5, FS, seed=42)
    nz = white_noise(2.5, FS, seed=43)
    capture = plane_wave_capture(sp, nz, 90.0, 22.5, sir_db=0.0)
    spec = ScorerSpec(kind=ScorerKind.ORACLE, reference=sp)
    result = run_ians(capture, psi=0.0, spec=spec)
    beta = result.score_vector.scores
    elapsed = time.monotonic() - start
    assert abs(result.phi_star - 22.5) <= 4.0
    assert result.best_score - beta[0] >= 0.1
    assert elapsed < 60.0
    print(f"[PASS] criterion 5: phi* = {result.phi_star:.1f} deg, "
          f"margin over passthrough = {result.best_score - beta[0]:.3f} "
          f"({elapsed:.1f} s)")


def test_criterion_6_reverberant_enhancement():
    """Default room, interferer at 22.5 deg, SIR 0 dB, 3 s utterance:
    oracle selection gains at least 0.05 over the noisy reference channel
    and the score minimum sits on the talker (90 +- 4 deg)."""
    start = time.monotonic()
    sp = synthetic_speech(3.0, FS, seed=7)
    nz = babble_noise(3.0, FS, seed=8)
    scenario = RoomScenario(interference_angle=22.5, sir_db=0.0)
    capture = simulate_capture(scenario, sp, nz)
    spec = ScorerSpec(kind=ScorerKind.ORACLE, reference=sp)
    result = run_ians(capture, psi=0.0, spec=spec)
    noisy = score_oracle(capture.ch1, sp)
    beta = result.score_vector.scores
    worst_angle = float(result.grid.angles[int(np.argmin(beta))])
    elapsed = time.monotonic() - start
    assert result.best_score >= noisy + 0.05
    assert abs(worst_angle - 90.0) <= 4.0
    assert elapsed < 120.0
    print(f"[PASS] criterion 6: improvement = {result.best_score - noisy:+.3f} "
          f"(noisy {noisy:.3f} -> {result.best_score:.3f}), "
          f"beta minimum at {worst_angle:.0f} deg ({elapsed:.1f} s)")


@pytest.fixture(scope="module")
def desk_suite():
    """16 rows: 2 utterances x 2 noises x 2 angles x 2 SIRs in the default
    room, with per-row scores of every system at both steer angles."""
    start = time.monotonic()
    grid = AngleGrid()
    rows = []
    for u, speech_seed in enumerate((60, 61)):
        for noise_kind in ("white", "babble"):
            for theta_i in (22.5, 112.5):
                for sir in (-5.0, 5.0):
                    sp = synthetic_speech(2.5, FS, seed=speech_seed)
                    maker = white_noise if noise_kind == "white" else babble_noise
                    nz = maker(2.5, FS, seed=70 + u)
                    scenario = RoomScenario(interference_angle=theta_i, sir_db=sir)
                    capture = simulate_capture(scenario, sp, nz)
                    oracle = ScorerSpec(kind=ScorerKind.ORACLE, reference=sp)
                    rms = ScorerSpec(kind=ScorerKind.PLUGIN,
                                     plugin_cmd=f"{STUB} --mode rms")
                    stoins0 = run_ians(capture, 0.0, grid, oracle)
                    stoins80 = run_ians(capture, 80.0, grid, oracle)
                    ians_rms = run_ians(capture, 0.0, grid, rms)
                    tnsbf = run_t_nsbf(capture, scenario.speech_angle, theta_i)
                    rows.append({
                        "noisy": score_oracle(capture.ch1, sp),
                        "stoins0": score_oracle(stoins0.output, sp),
                        "stoins80": score_oracle(stoins80.output, sp),
                        "ians_rms": score_oracle(ians_rms.output, sp),
                        "tnsbf": score_oracle(tnsbf, sp),
                    })
    return rows, time.monotonic() - start


def test_criterion_7_upper_bound_and_ordering(desk_suite):
    """Oracle selection upper-bounds any scorer's selection, never falls
    below the noisy baseline, and stays within 0.02 of the known-DOA
    baseline."""
    rows, build_elapsed = desk_suite
    mean = {k: float(np.mean([r[k] for r in rows])) for k in rows[0]}
    for r in rows:
        assert r["stoins0"] >= r["ians_rms"] - 1e-9
    assert mean["stoins0"] >= mean["ians_rms"] - 1e-9
    assert mean["stoins0"] >= mean["noisy"] - 1e-9
    assert mean["stoins0"] >= mean["tnsbf"] - 0.02
    assert build_elapsed < 600.0
    print(f"[PASS] criterion 7: mean noisy {mean['noisy']:.3f} | "
          f"rms-scorer {mean['ians_rms']:.3f} | oracle {mean['stoins0']:.3f} | "
          f"known-DOA {mean['tnsbf']:.3f} (suite built in {build_elapsed:.0f} s)")


def test_criterion_8_steer_angle_robustness(desk_suite):
    """Mean |score(psi=0) - score(psi=80)| stays within 0.02 on the suite."""
    rows, _ = desk_suite
    deltas = [abs(r["stoins0"] - r["stoins80"]) for r in rows]
    mean_delta = float(np.mean(deltas))
    assert mean_delta <= 0.02
    print(f"[PASS] criterion 8: mean |psi0 - psi80| = {mean_delta:.4f} "
          f"(max {max(deltas):.4f})")


def test_criterion_9_plugin_protocol_conformance():
    """91 in-order scored requests through the stub, id fidelity,
    determinism across runs, and the fault-injection paths."""
    start = time.monotonic()
    sp = synthetic_speech(2.0, FS, seed=90)
    nz = white_noise(2.0, FS, seed=91)
    capture = plane_wave_capture(sp, nz, 90.0, 67.5, sir_db=0.0)
    spec = ScorerSpec(kind=ScorerKind.PLUGIN, plugin_cmd=f"{STUB} --mode rms")
    first = run_ians(capture, psi=0.0, spec=spec)
    second = run_ians(capture, psi=0.0, spec=spec)
    assert len(first.score_vector.scores) == 91
    assert np.all(np.isfinite(first.score_vector.scores))  # all 91 answered
    np.testing.assert_array_equal(first.score_vector.scores,
                                  second.score_vector.scores)

    # id fidelity at the protocol level
    with PluginHandle(f"{STUB} --mode const --value 0.5") as plugin:
        for expected_id in range(5):
            assert plugin._next_id == expected_id
            assert score_plugin(sp, plugin) == 0.5

    # fault injection: hang -> timeout; die -> closed stream
    with PluginHandle(f"{STUB} --mode hang", timeout=0.5) as plugin:
        with pytest.raises(ScorerError, match="timed out"):
            score_plugin(sp, plugin)
    with PluginHandle(f"{STUB} --mode die") as plugin:
        with pytest.raises(ScorerError):
            score_plugin(sp, plugin)
    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    print(f"[PASS] criterion 9: 91-candidate sweep deterministic over the "
          f"stub, ids echo, faults surface ({elapsed:.1f} s)")
