"""Protocol-test scorer stub: speaks ians-scorer-v1 on stdio without any
model behind it.

    python -m ians.plugin_stub --mode const --value 0.5
    python -m ians.plugin_stub --mode rms
    python -m ians.plugin_stub --mode hang     # accepts requests, never answers
    python -m ians.plugin_stub --mode die      # exits after the handshake
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np


def _rms(path: str) -> float:
    from scipy.io import wavfile

    _, data = wavfile.read(path)
    samples = data.astype(np.float64)
    if data.dtype == np.int16:
        samples /= 32768.0
    return float(np.sqrt(np.mean(samples**2)))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mode", choices=["const", "rms", "hang", "die"],
                        default="const")
    parser.add_argument("--value", type=float, default=0.5)
    args = parser.parse_args(argv)

    print(json.dumps({"protocol": "ians-scorer-v1"}), flush=True)
    if args.mode == "die":
        return 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        if args.mode == "hang":
            continue
        try:
            if args.mode == "const":
                score = args.value
            else:
                score = _rms(request["wav_path"])
            print(json.dumps({"id": request["id"], "score": score}), flush=True)
        except Exception as exc:  # report per-request trouble, keep serving
            print(json.dumps({"id": request.get("id"), "error": str(exc)}),
                  flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
