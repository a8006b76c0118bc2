"""Coverage of a random deployment, and where the holes are.

Scatters sensors over the default 100 m x 100 m field, switches a random
half of them on and reports the covered fraction, node-use rate and combined
fitness. Then prints the ASCII map ('#' covered, '.' hole) and the largest
holes.

    python demos/coverage_basics.py --sensors 60 --seed 4
"""

import argparse

import numpy as np

from coverset import MonitoringGrid, evaluate, find_coverage_holes, random_deployment
from coverset.coverage import CoverageModel, to_ascii


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sensors", type=int, default=100)
    ap.add_argument("--radius", type=float, default=10.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--on", type=float, default=0.5, help="fraction of sensors switched on")
    args = ap.parse_args()

    grid = MonitoringGrid()
    d = random_deployment(args.sensors, grid, args.seed, radius=args.radius)
    bits = np.random.default_rng(args.seed).random(d.n) < args.on

    for label, cv in (("all on", np.ones(d.n, bool)), ("random subset", bits)):
        r = evaluate(d, cv, grid)
        print(f"{label:>14}: coverage {100 * r.f1:5.1f}%  active {r.active_count:3d}/{d.n}  "
              f"f1^2/f2 = {r.combined:.3f}")

    holes = find_coverage_holes(d, bits, grid)
    sizes = sorted((len(c) for c in holes.components), reverse=True)
    print(f"\n{holes.n_holes} holes; largest {sizes[:5]} cells")

    mask = CoverageModel(d, grid).covered_mask(bits).reshape(grid.shape)
    # every other row and column keeps the map terminal-sized
    print(to_ascii(mask[::2, ::2]))


if __name__ == "__main__":
    main()
