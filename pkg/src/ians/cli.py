"""Command-line front end.

    ians simulate scenario.json speech.wav interference.wav -o outdir
    ians run ch1.wav ch2.wav --scorer oracle --ref clean.wav --psi 0 --psi 80 ...
    ians sweep ch1.wav ch2.wav clean.wav -o curve.csv [--plugin-cmd "..."]
    ians batch batch.json -o outdir
    ians stoi clean.wav degraded.wav
    ians make-signals --kind speech --duration 3 -o speech.wav
    ians weights-csv --theta-d 0 --phi 22.5 -o weights.csv
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from ians.array_model import ArrayGeometry, nsbf_weights, write_weights_csv
from ians.candidates import (
    AngleGrid,
    candidates_to_time,
    dump_candidate_wavs,
    generate_candidates,
)
from ians.dsp import StftConfig, read_wav, stft, write_wav
from ians.engine import run_ians, run_ians_dual, run_t_nsbf
from ians.room import RoomScenario, StereoCapture, simulate_capture
from ians.scoring import ScorerKind, ScorerSpec, score_oracle
from ians.signals import synthetic_noise, synthetic_speech
from ians.stoi import stoi


def _add_scorer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scorer", choices=["oracle", "plugin"], default="oracle")
    p.add_argument("--ref", help="clean reference WAV (oracle scorer)")
    p.add_argument("--plugin-cmd", help="scorer plugin command line (plugin scorer)")
    p.add_argument("--plugin-timeout", type=float, default=30.0)


def _scorer_spec(args) -> ScorerSpec:
    if args.scorer == "oracle":
        if not args.ref:
            raise SystemExit("--scorer oracle requires --ref clean.wav")
        return ScorerSpec(kind=ScorerKind.ORACLE, reference=read_wav(args.ref))
    if not args.plugin_cmd:
        raise SystemExit("--scorer plugin requires --plugin-cmd")
    return ScorerSpec(kind=ScorerKind.PLUGIN, plugin_cmd=args.plugin_cmd,
                      plugin_timeout=args.plugin_timeout)


def cmd_simulate(args) -> int:
    scenario = RoomScenario.from_json(args.scenario)
    speech = read_wav(args.speech)
    interference = read_wav(args.interference)
    capture = simulate_capture(scenario, speech, interference)
    os.makedirs(args.output_dir, exist_ok=True)
    ch1 = os.path.join(args.output_dir, "ch1.wav")
    ch2 = os.path.join(args.output_dir, "ch2.wav")
    write_wav(ch1, capture.ch1)
    write_wav(ch2, capture.ch2)
    print(ch1)
    print(ch2)
    return 0


def cmd_run(args) -> int:
    ch1, ch2 = read_wav(args.ch1), read_wav(args.ch2)
    capture_geom = ArrayGeometry(spacing=args.spacing, sound_speed=args.sound_speed)
    capture = StereoCapture(ch1=ch1, ch2=ch2, geometry=capture_geom)
    grid = AngleGrid.with_step(args.grid_step)
    spec = _scorer_spec(args)
    psis = args.psi if args.psi else [0.0]
    if len(psis) == 1:
        result = run_ians(capture, psis[0], grid, spec)
    elif len(psis) == 2:
        result = run_ians_dual(capture, psis[0], psis[1], grid, spec)
    else:
        raise SystemExit("--psi may be given at most twice")
    write_wav(args.out_wav, result.output)
    with open(args.out_json, "w") as fh:
        json.dump(result.to_json_dict(os.path.abspath(args.out_wav)), fh, indent=2)
    if args.dump_candidates:
        cs = generate_candidates(stft(ch1), stft(ch2), result.psi, grid, capture_geom)
        dump_candidate_wavs(args.dump_candidates, candidates_to_time(cs), grid)
    print(f"phi_star={result.phi_star:.1f} deg  psi={result.psi:.1f} deg  "
          f"score={result.best_score:.4f}")
    return 0


def cmd_sweep(args) -> int:
    ch1, ch2 = read_wav(args.ch1), read_wav(args.ch2)
    clean = read_wav(args.clean)
    geom = ArrayGeometry(spacing=args.spacing, sound_speed=args.sound_speed)
    capture = StereoCapture(ch1=ch1, ch2=ch2, geometry=geom)
    grid = AngleGrid.with_step(args.grid_step)
    oracle = ScorerSpec(kind=ScorerKind.ORACLE, reference=clean)
    beta = run_ians(capture, args.psi, grid, oracle).score_vector.scores
    alpha = None
    if args.plugin_cmd:
        plugin = ScorerSpec(kind=ScorerKind.PLUGIN, plugin_cmd=args.plugin_cmd,
                            plugin_timeout=args.plugin_timeout)
        alpha = run_ians(capture, args.psi, grid, plugin).score_vector.scores
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["angle", "alpha", "beta"])
        for i, angle in enumerate(grid.angles):
            a = "" if alpha is None else f"{alpha[i]:.6f}"
            writer.writerow([f"{angle:.1f}", a, f"{beta[i]:.6f}"])
    print(args.output)
    return 0


def _batch_rows(batch: dict) -> list:
    rows = batch["rows"]
    for i, row in enumerate(rows):
        for key in ("speech_wav", "interference_wav", "theta_i", "sir_db"):
            if key not in row:
                raise ValueError(f"batch row {i} is missing {key!r}")
    return rows


def cmd_batch(args) -> int:
    with open(args.batch) as fh:
        batch = json.load(fh)
    rows = _batch_rows(batch)
    scenario_base = batch.get("scenario", {})
    scorer_cfg = batch.get("scorer", {"kind": "oracle"})
    out_dir = args.output_dir or batch.get("output_dir") or "batch_out"
    os.makedirs(out_dir, exist_ok=True)

    results = []
    failures = 0
    for i, row in enumerate(rows):
        try:
            results.append(_run_batch_row(i, row, scenario_base, scorer_cfg, out_dir))
        except Exception as exc:
            failures += 1
            results.append({"row": i, "error": str(exc)})
            print(f"row {i} failed: {exc}", file=sys.stderr)

    fieldnames = ["row", "speech_wav", "interference_wav", "theta_i", "sir_db",
                  "stoi_noisy", "stoi_ians", "stoi_stoins", "stoi_tnsbf",
                  "phi_star_ians", "phi_star_stoins", "error"]
    rows_csv = os.path.join(out_dir, "rows.csv")
    with open(rows_csv, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for r in results:
            writer.writerow({k: r.get(k, "") for k in fieldnames})

    ok = [r for r in results if "error" not in r]
    summary = {"rows": len(rows), "failed": failures}
    if ok:
        for key in ("stoi_noisy", "stoi_ians", "stoi_stoins", "stoi_tnsbf"):
            summary["mean_" + key.removeprefix("stoi_")] = float(
                np.mean([r[key] for r in ok])
            )
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2)
    print(json.dumps(summary, indent=2))
    return 1 if failures else 0


def _run_batch_row(i: int, row: dict, scenario_base: dict, scorer_cfg: dict,
                   out_dir: str) -> dict:
    speech = read_wav(row["speech_wav"])
    interference = read_wav(row["interference_wav"])
    overrides = dict(scenario_base)
    overrides.pop("geometry", None)
    overrides["interference_angle"] = float(row["theta_i"])
    overrides["sir_db"] = float(row["sir_db"])
    scenario = RoomScenario(**overrides)
    capture = simulate_capture(scenario, speech, interference)
    grid = AngleGrid()
    psis = [float(p) for p in row.get("psi", [0.0])]

    oracle = ScorerSpec(kind=ScorerKind.ORACLE, reference=speech)
    if scorer_cfg.get("kind", "oracle") == "oracle":
        ians_spec = oracle
    else:
        ians_spec = ScorerSpec(kind=ScorerKind.PLUGIN,
                               plugin_cmd=scorer_cfg["plugin_cmd"],
                               plugin_timeout=scorer_cfg.get("plugin_timeout", 30.0))

    def run(spec):
        if len(psis) >= 2:
            return run_ians_dual(capture, psis[0], psis[1], grid, spec)
        return run_ians(capture, psis[0], grid, spec)

    stoins = run(oracle)
    ians = stoins if ians_spec is oracle else run(ians_spec)
    tnsbf = run_t_nsbf(capture, scenario.speech_angle, scenario.interference_angle)

    out = {
        "row": i,
        "speech_wav": row["speech_wav"],
        "interference_wav": row["interference_wav"],
        "theta_i": row["theta_i"],
        "sir_db": row["sir_db"],
        "stoi_noisy": score_oracle(capture.ch1, speech),
        "stoi_ians": score_oracle(ians.output, speech),
        "stoi_stoins": score_oracle(stoins.output, speech),
        "stoi_tnsbf": score_oracle(tnsbf, speech),
        "phi_star_ians": ians.phi_star,
        "phi_star_stoins": stoins.phi_star,
    }
    write_wav(os.path.join(out_dir, f"row{i:03d}_stoins.wav"), stoins.output)
    return out


def cmd_stoi(args) -> int:
    clean, degraded = read_wav(args.clean), read_wav(args.degraded)
    n = min(len(clean), len(degraded))
    print(f"{stoi(clean.trimmed(n), degraded.trimmed(n)):.4f}")
    return 0


def cmd_make_signals(args) -> int:
    if args.kind == "speech":
        wf = synthetic_speech(args.duration, args.sample_rate, args.seed)
    else:
        wf = synthetic_noise(args.kind, args.duration, args.sample_rate, args.seed)
    write_wav(args.output, wf)
    print(args.output)
    return 0


def cmd_weights_csv(args) -> int:
    geom = ArrayGeometry(spacing=args.spacing, sound_speed=args.sound_speed)
    w = nsbf_weights(args.theta_d, args.phi, geom, StftConfig(), args.sample_rate)
    write_weights_csv(args.output, w, StftConfig(), args.sample_rate)
    print(args.output)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ians", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="render a two-channel capture of a scene")
    p.add_argument("scenario")
    p.add_argument("speech")
    p.add_argument("interference")
    p.add_argument("-o", "--output-dir", default="capture_out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="enhance a two-channel capture")
    p.add_argument("ch1")
    p.add_argument("ch2")
    _add_scorer_flags(p)
    p.add_argument("--psi", type=float, action="append",
                   help="steer angle in degrees; give twice for a dual run")
    p.add_argument("--grid-step", type=float, default=2.0)
    p.add_argument("--spacing", type=float, default=0.008)
    p.add_argument("--sound-speed", type=float, default=343.0)
    p.add_argument("--out-json", default="result.json")
    p.add_argument("--out-wav", default="enhanced.wav")
    p.add_argument("--dump-candidates", metavar="DIR")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="score-vs-null-angle curves as CSV")
    p.add_argument("ch1")
    p.add_argument("ch2")
    p.add_argument("clean")
    p.add_argument("-o", "--output", default="sweep.csv")
    p.add_argument("--psi", type=float, default=0.0)
    p.add_argument("--grid-step", type=float, default=2.0)
    p.add_argument("--spacing", type=float, default=0.008)
    p.add_argument("--sound-speed", type=float, default=343.0)
    p.add_argument("--plugin-cmd")
    p.add_argument("--plugin-timeout", type=float, default=30.0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("batch", help="run an evaluation matrix from JSON")
    p.add_argument("batch")
    p.add_argument("-o", "--output-dir")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("stoi", help="score a degraded WAV against a clean one")
    p.add_argument("clean")
    p.add_argument("degraded")
    p.set_defaults(func=cmd_stoi)

    p = sub.add_parser("make-signals", help="synthesize demo/test material")
    p.add_argument("--kind", choices=["speech", "white", "pink", "babble"],
                   default="speech")
    p.add_argument("--duration", type=float, default=3.0)
    p.add_argument("--sample-rate", type=int, default=16000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_make_signals)

    p = sub.add_parser("weights-csv", help="dump a beamformer weight table")
    p.add_argument("--theta-d", type=float, required=True)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--sample-rate", type=int, default=16000)
    p.add_argument("--spacing", type=float, default=0.008)
    p.add_argument("--sound-speed", type=float, default=343.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_weights_csv)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
