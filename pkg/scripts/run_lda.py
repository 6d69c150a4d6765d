"""Repeated-split discriminant misclassification study.

Input is a headed CSV with one label column (last by default).  `rates`
mode writes one test misclassification per split; `sweep` mode writes the
mean rate per (method, penalty) pair at fixed splits:

    python3 scripts/run_lda.py --input data/ionosphere.csv \
        --estimator two_step --target scalar_nu --out results/lda
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile

from precimat.cli import main as cli_main


def parse_args() -> argparse.Namespace:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input", required=True, help="labeled CSV path")
    ap.add_argument("--estimator", default="two_step")
    ap.add_argument("--target", default="scalar_nu")
    ap.add_argument("--label-col", type=int, default=-1)
    ap.add_argument("--mode", choices=("rates", "sweep"), default="rates")
    ap.add_argument("--repetitions", type=int, default=100)
    ap.add_argument("--train", type=int, default=40)
    ap.add_argument("--validation", type=int, default=40)
    ap.add_argument("--sweep-methods", nargs="*", default=[])
    ap.add_argument("--sweep-count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/lda")
    return ap.parse_args()


def main() -> int:
    args = parse_args()
    cfg = {
        "input": args.input,
        "estimator": args.estimator,
        "target": args.target,
        "label_col": args.label_col,
        "mode": args.mode,
        "repetitions": args.repetitions,
        "train": args.train,
        "validation": args.validation,
        "sweep_methods": args.sweep_methods,
        "sweep_count": args.sweep_count,
        "seed": args.seed,
    }
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
        cfg_path = fh.name
    return cli_main(["lda", "--config", cfg_path, "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
