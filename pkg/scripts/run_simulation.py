"""Replicated loss study over synthetic networks.

Builds a simulate config from the command line and hands it to the batch
driver; `losses.csv` lands in --out.  Example:

    python3 scripts/run_simulation.py --networks 1 2 5 --p 20 --n 50 \
        --replications 20 --methods alt_ridge two_step --out results/sim
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile

from precimat.cli import main as cli_main


def parse_args() -> argparse.Namespace:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--networks", type=int, nargs="+", default=[1, 2, 3, 4, 5, 6])
    ap.add_argument("--p", type=int, default=20)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--replications", type=int, default=20)
    ap.add_argument(
        "--methods",
        nargs="+",
        default=["glasso", "alt_ridge", "two_step"],
    )
    ap.add_argument(
        "--targets",
        nargs="+",
        default=["identity", "scalar_nu"],
        help="target kinds: zero | identity | scalar_nu",
    )
    ap.add_argument("--folds", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/simulation")
    return ap.parse_args()


def main() -> int:
    args = parse_args()
    cfg = {
        "networks": args.networks,
        "p": args.p,
        "n": args.n,
        "replications": args.replications,
        "methods": args.methods,
        "targets": args.targets,
        "folds": args.folds,
        "seed": args.seed,
    }
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
        cfg_path = fh.name
    return cli_main(
        [
            "simulate",
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
