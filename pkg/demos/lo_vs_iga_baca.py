"""Lion optimization against the IGA-BACA hybrid on the same deployments.

Both run 250 generations on 100 sensors (r = 10 m) for a handful of seeds;
the table shows median coverage, active nodes and fitness at each
checkpoint, plus the all-on ceiling no subset can beat.

    python demos/lo_vs_iga_baca.py --seeds 1,2,3
"""

import argparse
import statistics
from pathlib import Path

from coverset.harness import RunConfig, compare

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", default="1,2,3,4,5")
    ap.add_argument("--out", help="also write per-run artifacts here")
    args = ap.parse_args()
    seeds = [int(s) for s in args.seeds.split(",")]

    cfgs = [RunConfig.load(CONFIGS / f"standard_{n}.json") for n in ("iga_baca", "lo", "random")]
    rows, results = compare(cfgs, seeds, args.out)

    print(f"{'algorithm':>9} {'gen':>4} {'coverage %':>10} {'active':>7} {'f1^2/f2':>8}")
    for r in rows:
        if r["algorithm"] == "random":
            continue
        print(f"{r['label']:>9} {r['checkpoint']:>4} {r['coverage_pct_median']:10.2f} "
              f"{r['active_median']:7.1f} {r['combined_median']:8.3f}")
    ceiling = statistics.median(results[("random", s)].snapshots[0].coverage_pct for s in seeds)
    print(f"\nall sensors on: median coverage {ceiling:.2f}%")


if __name__ == "__main__":
    main()
