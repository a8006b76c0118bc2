"""Render coverage maps for the all-on baseline and an optimized subset.

Writes ``baseline.pgm`` and ``lo.pgm`` (plus .txt and .json sidecars) to
the output directory. Any PGM viewer opens them; y points up.

    python demos/baseline_map.py --out /tmp/maps
"""

import argparse
import json
from pathlib import Path

import numpy as np

from coverset.coverage import MonitoringGrid
from coverset.harness import RunConfig, emit_coverage_map, run_experiment

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("maps"))
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    res = run_experiment(RunConfig.load(CONFIGS / "standard_lo.json").with_overrides(seed=args.seed))
    d, grid = res.deployment, MonitoringGrid()
    for name, bits in (("baseline", np.ones(d.n, bool)), ("lo", res.best_bits)):
        paths = emit_coverage_map(d, bits, grid, args.out / f"{name}.pgm")
        info = json.loads(paths["json"].read_text())
        print(f"{name:>8}: coverage {100 * info['f1']:.2f}%, {info['active_count']} active, "
              f"{info['holes']} holes -> {paths['pgm']}")


if __name__ == "__main__":
    main()
