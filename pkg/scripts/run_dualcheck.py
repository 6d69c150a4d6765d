"""Dual-route comparison table.

Reproduces the per-iteration off-diagonal difference table between the
box-constrained dual optimum and the lasso-implied dual variable:

    python3 scripts/run_dualcheck.py --p 3 --iterations 15 --out results/dual
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile

from precimat.cli import main as cli_main


def parse_args() -> argparse.Namespace:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=3, choices=(2, 3))
    ap.add_argument("--iterations", type=int, default=15)
    ap.add_argument("--lam", type=float, default=0.6)
    ap.add_argument("--alpha", type=float, default=0.4)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--network", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/dualcheck")
    return ap.parse_args()


def main() -> int:
    args = parse_args()
    cfg = {
        "p": args.p,
        "iterations": args.iterations,
        "lam": args.lam,
        "alpha": args.alpha,
        "n": args.n,
        "network": args.network,
        "seed": args.seed,
    }
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
        cfg_path = fh.name
    return cli_main(
        [
            "dualcheck",
            "--config",
            cfg_path,
            "--out",
            args.out,
            "--threads",
            str(args.threads),
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
