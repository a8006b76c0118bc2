"""``coverset`` command line.

Exit codes: 0 success, 2 config error, 3 I/O error, 4 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .coverage import DimensionError, MonitoringGrid, as_control_vector, load_deployment
from .framework import InvariantError
from .harness import ConfigError, RunConfig, compare, emit_coverage_map, load_manifest, rows_to_csv, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INVARIANT = 0, 2, 3, 4


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer, got {text}")
    return v


def _seed_list(text: str) -> list[int]:
    try:
        return [_seed(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coverset", description="WSN coverage optimization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment from a JSON config")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--out", type=Path, help="output directory (overrides the config)")
    p.add_argument("--with-timing", action="store_true", help="fill the wallclock column of convergence.csv")

    p = sub.add_parser("compare", help="run a manifest of configs over several seeds")
    p.add_argument("--manifest", required=True, type=Path)
    p.add_argument("--seeds", required=True, type=_seed_list)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("map", help="render the coverage map of a control vector")
    p.add_argument("--deployment", required=True, type=Path)
    p.add_argument("--bits", required=True, help="control vector as a 0/1 string")
    p.add_argument("--out", required=True, type=Path, help="PGM path; .txt and .json land next to it")
    p.add_argument("--width", type=float, default=100.0)
    p.add_argument("--height", type=float, default=100.0)
    p.add_argument("--cells-x", type=int, default=100)
    p.add_argument("--cells-y", type=int, default=100)
    return parser


def _cmd_run(args) -> int:
    cfg = RunConfig.load(args.config).with_overrides(seed=args.seed, output_dir=args.out)
    res = run_experiment(cfg, with_timing=args.with_timing)
    r = res.best_report
    print(f"{cfg.algorithm} seed={cfg.seed}: coverage {100 * r.f1:.2f}% with {r.active_count}/{res.deployment.n} "
          f"active sensors, fitness {r.combined:.4f}")
    for s in res.snapshots:
        print(f"  gen {s.generation:>4}  coverage {s.coverage_pct:6.2f}%  active {s.active_count:>3}  "
              f"{s.elapsed_ms / 1e3:7.2f} s")
    if cfg.output_dir:
        print(f"artifacts written to {cfg.output_dir}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    configs = load_manifest(args.manifest)
    rows, _ = compare(configs, args.seeds, args.out)
    sys.stdout.write(rows_to_csv(rows))
    return EXIT_OK


def _cmd_map(args) -> int:
    try:
        grid = MonitoringGrid(args.width, args.height, args.cells_x, args.cells_y)
        d = load_deployment(args.deployment)
        bits = as_control_vector(args.bits.strip(), d.n)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"deployment {args.deployment} is not valid JSON: {exc}") from exc
    except (ValueError, DimensionError) as exc:
        raise ConfigError(str(exc)) from exc
    paths = emit_coverage_map(d, bits, grid, args.out)
    info = json.loads(paths["json"].read_text())
    print(f"coverage {100 * info['f1']:.2f}% with {info['active_count']} active sensors, {info['holes']} holes")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "compare": _cmd_compare, "map": _cmd_map}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
