"""Entry point.

    stoinet-plugin serve --checkpoint model.pt
    stoinet-plugin serve --stub rms
    STOINET_CHECKPOINT=model.pt stoinet-plugin serve
"""
from __future__ import annotations

import argparse
import os
import sys


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="stoinet-plugin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="speak ians-scorer-v1 on stdio")
    p.add_argument("--checkpoint",
                   default=os.environ.get("STOINET_CHECKPOINT"),
                   help="path to the pretrained state dict "
                        "(default: $STOINET_CHECKPOINT)")
    p.add_argument("--stub", choices=["rms", "const"],
                   help="serve without a model, for protocol testing")
    p.add_argument("--const-value", type=float, default=0.5)

    args = parser.parse_args(argv)
    from stoinet_plugin.server import CheckpointScorer, StubScorer, serve

    if args.stub:
        scorer = StubScorer(args.stub, args.const_value)
    elif args.checkpoint:
        scorer = CheckpointScorer(args.checkpoint)
    else:
        print("error: need --checkpoint (or $STOINET_CHECKPOINT), or --stub",
              file=sys.stderr)
        return 2
    return serve(scorer)


if __name__ == "__main__":
    sys.exit(main())
