"""Rolling partial-correlation network strength from a price table.

Input is a CSV whose first column is an ISO date and whose remaining
columns are asset prices.  Writes the rolling mean-strength series, a
skipped-window list, and per-year edge lists:

    python3 scripts/run_network.py --input data/prices.csv \
        --estimator alt_ridge --target identity --out results/network
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile

from precimat.cli import main as cli_main


def parse_args() -> argparse.Namespace:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input", required=True, help="dated price CSV path")
    ap.add_argument("--estimator", default="alt_ridge")
    ap.add_argument("--target", default="identity")
    ap.add_argument("--window-days", type=int, default=365)
    ap.add_argument("--shift-days", type=int, default=30)
    ap.add_argument("--signed", action="store_true")
    ap.add_argument("--no-yearly", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/network")
    return ap.parse_args()


def main() -> int:
    args = parse_args()
    cfg = {
        "input": args.input,
        "estimator": args.estimator,
        "target": args.target,
        "window_days": args.window_days,
        "shift_days": args.shift_days,
        "signed": args.signed,
        "yearly": not args.no_yearly,
        "seed": args.seed,
    }
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
        cfg_path = fh.name
    return cli_main(["network", "--config", cfg_path, "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
