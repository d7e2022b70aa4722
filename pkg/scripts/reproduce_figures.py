"""Write the data behind the realization and covariance figures for both examples.

For each shipped configuration this runs ``frbe simulate`` (one realization on
the configured lattice) and ``frbe covariance`` (surface, spatial and temporal
slices), with gnuplot scripts alongside the CSV files.

    python3 scripts/reproduce_figures.py --out-dir figures --threads 4
"""

import argparse
import sys
from pathlib import Path

from frbe_fields.cli import main

ROOT = Path(__file__).resolve().parent.parent


def run(argv: list[str]) -> None:
    code = main(argv)
    if code:
        sys.exit(code)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="figures")
    ap.add_argument("--threads", default="1")
    ap.add_argument("--configs", nargs="*", default=["example31", "example32"])
    args = ap.parse_args()
    for name in args.configs:
        cfg = str(ROOT / "configs" / f"{name}.json")
        common = ["--config", cfg, "--out-dir", args.out_dir, "--threads", args.threads, "--gnuplot"]
        run(["simulate", *common, "--run-id", f"{name}.field"])
        run(["covariance", *common])
