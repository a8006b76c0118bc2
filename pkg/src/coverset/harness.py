"""Experiment runner: configs in, convergence traces and coverage maps out.

A run is fully determined by its config and seed. The seed is split with
``numpy.random.SeedSequence`` into one stream for the random deployment and
one for the optimizer, so different algorithms run with the same seed see
the same sensor field.

Artifacts written to a run directory::

    convergence.csv   one row per generation (wallclock column empty
                      unless timing is requested, so reruns are byte-identical)
    snapshots.csv     checkpoint rows: coverage %, active nodes, fitness
    result.json       config echo, resolved parameters, best vector, snapshots
    deployment.json   {"radius": r, "sensors": [[x, y], ...]}
    coverage.pgm/.txt/.json   map of the best vector
    timing.json       wallclock per generation and per checkpoint
"""

from __future__ import annotations

import copy
import csv
import io
import json
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .antcolony import AcoParams, BinaryAntColony, IgaBacaConfig, iga_baca_run
from .coverage import (
    CoverageModel,
    Deployment,
    FitnessReport,
    MonitoringGrid,
    as_control_vector,
    bits_to_str,
    find_coverage_holes,
    random_deployment,
    save_deployment,
    to_ascii,
    to_pgm,
)
from .framework import ConvergenceTrace, Candidate, Problem, Termination, make_rng, run
from .genetic import AdaptiveGA, AdaptiveGaParams
from .lion import LionOptimizer, LionParams
from .pso import ParticleSwarm, PsoParams

__all__ = [
    "ALGORITHMS",
    "ConfigError",
    "ArtifactError",
    "RunConfig",
    "Snapshot",
    "RunResult",
    "run_experiment",
    "compare",
    "load_manifest",
    "emit_coverage_map",
]

ALGORITHMS = ("iga", "baca", "iga-baca", "lo", "pso", "random")
PHASE_KEYS = ("iga_generations", "baca_generations", "outer_loops")
SNAPSHOT_HEADER = ["generation", "coverage_pct", "active_count", "best_combined"]
COMPARE_HEADER = [
    "label", "algorithm", "checkpoint", "runs",
    "coverage_pct_median", "coverage_pct_min", "coverage_pct_max",
    "active_median", "active_min", "active_max",
    "combined_median", "elapsed_ms_median",
]


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class ArtifactError(OSError):
    """An output file could not be written."""


def _field_names(cls):
    return {f.name for f in fields(cls)}


PARAM_OWNERS = {
    "iga": (AdaptiveGaParams,),
    "baca": (AcoParams,),
    "iga-baca": (AdaptiveGaParams, AcoParams),
    "lo": (LionParams,),
    "pso": (PsoParams,),
    "random": (),
}
KNOWN_PARAMS = set(PHASE_KEYS).union(
    *(_field_names(c) for c in (AdaptiveGaParams, AcoParams, LionParams, PsoParams))
)


def _build(cls, params: dict):
    kw = {k: params[k] for k in _field_names(cls) if k in params}
    for k in ("pc_clamp", "pm_clamp"):
        if k in kw:
            kw[k] = tuple(kw[k])
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {cls.__name__}: {exc}") from exc


@dataclass
class RunConfig:
    algorithm: str = "lo"
    generations: int = 250
    seed: int = 0
    width: float = 100.0
    height: float = 100.0
    cells_x: int = 100
    cells_y: int = 100
    radius: float = 10.0
    n_sensors: int = 100
    objective: str = "ratio"
    params: dict = field(default_factory=dict)
    checkpoints: tuple = ()
    output_dir: str | None = None
    deployment: str | None = None
    label: str | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; valid names: {', '.join(ALGORITHMS)}")
        if not isinstance(self.generations, int) or self.generations < 1:
            raise ConfigError(f"generations must be a positive integer, got {self.generations!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.objective not in ("ratio", "max"):
            raise ConfigError(f"objective must be 'ratio' or 'max', got {self.objective!r}")
        if not isinstance(self.n_sensors, int) or self.n_sensors < 1:
            raise ConfigError(f"n_sensors must be a positive integer, got {self.n_sensors!r}")
        unknown = set(self.params) - KNOWN_PARAMS
        if unknown:
            raise ConfigError(f"unknown algorithm parameters: {', '.join(sorted(unknown))}")
        self.checkpoints = tuple(sorted(set(int(c) for c in self.checkpoints))) or (self.generations,)
        bad = [c for c in self.checkpoints if not 1 <= c <= self.generations]
        if bad:
            raise ConfigError(f"checkpoints {bad} fall outside [1, {self.generations}]")
        try:
            self.grid = MonitoringGrid(self.width, self.height, self.cells_x, self.cells_y)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.radius > 0:
            raise ConfigError(f"radius must be positive, got {self.radius}")
        self.resolved = self._resolve_params()

    def _resolve_params(self) -> dict:
        out = {}
        for cls in PARAM_OWNERS[self.algorithm]:
            out[cls.__name__] = _build(cls, self.params)
        if self.algorithm == "iga-baca":
            loops = int(self.params.get("outer_loops", 1))
            if loops < 1:
                raise ConfigError("outer_loops must be positive")
            if "iga_generations" in self.params or "baca_generations" in self.params:
                try:
                    cfg = IgaBacaConfig(out["AdaptiveGaParams"], out["AcoParams"],
                                        int(self.params.get("iga_generations", self.generations // (2 * loops))),
                                        int(self.params.get("baca_generations", self.generations // (2 * loops))),
                                        loops)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from exc
                if cfg.total_generations != self.generations:
                    raise ConfigError(f"phase lengths add up to {cfg.total_generations} generations, "
                                      f"config asks for {self.generations}")
            else:
                if self.generations < 2 * loops:
                    raise ConfigError("iga-baca needs at least two generations per outer loop")
                cfg = IgaBacaConfig.for_budget(self.generations, out["AdaptiveGaParams"], out["AcoParams"], loops)
                if cfg.total_generations != self.generations:
                    raise ConfigError(f"generations={self.generations} does not split evenly over {loops} loops")
            out["IgaBacaConfig"] = cfg
        return out

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {"area", "radius", "n_sensors", "algorithm", "generations", "seed", "objective", "params",
                 "checkpoints", "output_dir", "deployment", "label"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        area = data.get("area", {})
        if not isinstance(area, dict):
            raise ConfigError("'area' must be an object with width/height/cells_x/cells_y")
        kw = dict(
            width=area.get("width", 100.0),
            height=area.get("height", 100.0),
            cells_x=area.get("cells_x", 100),
            cells_y=area.get("cells_y", 100),
        )
        for k in ("radius", "n_sensors", "algorithm", "generations", "seed", "objective", "label"):
            if k in data:
                kw[k] = data[k]
        kw["params"] = dict(data.get("params", {}))
        kw["checkpoints"] = tuple(data.get("checkpoints", ()))
        if data.get("output_dir") is not None:
            kw["output_dir"] = str(Path(base_dir or ".") / data["output_dir"])
        if data.get("deployment") is not None:
            kw["deployment"] = str(Path(base_dir or ".") / data["deployment"])
        return cls(**kw, raw=copy.deepcopy(data))

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ArtifactError(f"cannot read config {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data, path.parent)

    def with_overrides(self, seed=None, output_dir=None) -> "RunConfig":
        cfg = copy.copy(self)
        if seed is not None:
            cfg.seed = seed
        if output_dir is not None:
            cfg.output_dir = str(output_dir)
        cfg.__post_init__()
        return cfg

    def metadata(self) -> dict:
        resolved = {k: asdict(v) if not isinstance(v, IgaBacaConfig) else
                    {"iga_generations": v.iga_generations, "baca_generations": v.baca_generations,
                     "outer_loops": v.outer_loops}
                    for k, v in self.resolved.items()}
        used = set().union(*(_field_names(c) for c in PARAM_OWNERS[self.algorithm]))
        if self.algorithm == "iga-baca":
            used |= set(PHASE_KEYS)
        return {
            "config": copy.deepcopy(self.raw),
            "params": copy.deepcopy(self.params),
            "unused_params": sorted(set(self.params) - used),
            "algorithm": self.algorithm,
            "label": self.label or self.algorithm,
            "seed": self.seed,
            "generations": self.generations,
            "checkpoints": list(self.checkpoints),
            "area": {"width": self.width, "height": self.height, "cells_x": self.cells_x, "cells_y": self.cells_y},
            "radius": self.radius,
            "n_sensors": self.n_sensors,
            "objective": self.objective,
            "resolved": resolved,
        }


@dataclass(frozen=True)
class Snapshot:
    generation: int
    coverage_pct: float
    active_count: int
    combined: float
    elapsed_ms: float


@dataclass
class RunResult:
    best_bits: np.ndarray
    best_report: FitnessReport
    trace: ConvergenceTrace
    snapshots: list
    metadata: dict
    deployment: Deployment
    hole_count: int

    def snapshots_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SNAPSHOT_HEADER)
        for s in self.snapshots:
            w.writerow([s.generation, repr(s.coverage_pct), s.active_count, repr(s.combined)])
        return buf.getvalue()

    def to_json(self) -> dict:
        r = self.best_report
        return {
            "metadata": self.metadata,
            "best": {
                "bits": bits_to_str(self.best_bits),
                "covered_area": r.covered_area,
                "f1": r.f1,
                "f2": r.f2,
                "combined": r.combined,
                "active_count": r.active_count,
            },
            "hole_count": self.hole_count,
            "snapshots": [
                {"generation": s.generation, "coverage_pct": s.coverage_pct, "active_count": s.active_count,
                 "combined": s.combined}
                for s in self.snapshots
            ],
        }


def _rngs(seed: int):
    dep_seq, opt_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(dep_seq), make_rng(opt_seq)


def _deployment(cfg: RunConfig, rng) -> Deployment:
    if cfg.deployment:
        try:
            data = json.loads(Path(cfg.deployment).read_text())
        except OSError as exc:
            raise ArtifactError(f"cannot read deployment {cfg.deployment}: {exc.strerror}") from exc
        try:
            d = Deployment.from_dict(data)
            d.check_inside(cfg.grid)
        except ValueError as exc:
            raise ConfigError(f"deployment {cfg.deployment}: {exc}") from exc
        return d
    return random_deployment(cfg.n_sensors, cfg.grid, rng, cfg.radius)


def _optimize(cfg: RunConfig, problem: Problem, rng):
    res = cfg.resolved
    term = Termination(cfg.generations)
    if cfg.algorithm == "iga-baca":
        return iga_baca_run(problem, res["IgaBacaConfig"], rng)
    if cfg.algorithm == "iga":
        opt = AdaptiveGA(problem, res["AdaptiveGaParams"])
    elif cfg.algorithm == "baca":
        opt = BinaryAntColony(problem, res["AcoParams"])
    elif cfg.algorithm == "lo":
        opt = LionOptimizer(problem, res["LionParams"])
    else:
        opt = ParticleSwarm(problem, res["PsoParams"])
    return run(opt, term, rng)


def run_experiment(cfg: RunConfig, with_timing: bool = False) -> RunResult:
    """Run one configured experiment and write its artifacts if ``cfg.output_dir`` is set.

    The ``random`` algorithm is the all-active baseline: it evaluates the
    deployment once with every sensor switched on and reports one snapshot
    at generation 0.
    """
    dep_rng, opt_rng = _rngs(cfg.seed)
    deployment = _deployment(cfg, dep_rng)
    if cfg.deployment is None and deployment.n != cfg.n_sensors:
        raise ConfigError("deployment size does not match n_sensors")
    model = CoverageModel(deployment, cfg.grid, cfg.objective)
    problem = Problem(model)

    if cfg.algorithm == "random":
        bits = np.ones(deployment.n, dtype=bool)
        rep = problem.evaluate(bits)
        trace = ConvergenceTrace()
        trace.append(0, Candidate(bits, bits, rep), 0.0)
        best_bits, best_rep = bits, rep
        snapshots = [Snapshot(0, 100.0 * rep.f1, rep.active_count, rep.combined, 0.0)]
    else:
        best, trace, _ = _optimize(cfg, problem, opt_rng)
        best_bits, best_rep = best.bits, best.report
        snapshots = []
        for c in cfg.checkpoints:
            # a run that stopped early keeps its final state
            rec = next((r for r in reversed(trace.records) if r.generation <= c), trace.records[0])
            snapshots.append(Snapshot(c, 100.0 * rec.best_f1, rec.best_active, rec.best_combined, rec.wallclock_ms))

    holes = find_coverage_holes(deployment, best_bits, cfg.grid)
    result = RunResult(best_bits, best_rep, trace, snapshots, cfg.metadata(), deployment, holes.n_holes)
    if cfg.output_dir:
        write_artifacts(result, cfg, Path(cfg.output_dir), with_timing)
    return result


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc.strerror}") from exc


def write_artifacts(result: RunResult, cfg: RunConfig, out: Path, with_timing: bool = False) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactError(f"cannot create output directory {out}: {exc.strerror}") from exc
    _write(out / "convergence.csv", result.trace.to_csv(timing=with_timing))
    _write(out / "snapshots.csv", result.snapshots_csv())
    _write(out / "result.json", json.dumps(result.to_json(), indent=1) + "\n")
    _write(out / "timing.json", json.dumps({
        "wallclock_ms": [[r.generation, r.wallclock_ms] for r in result.trace.records],
        "snapshots": [[s.generation, s.elapsed_ms] for s in result.snapshots],
    }) + "\n")
    try:
        save_deployment(result.deployment, out / "deployment.json")
    except OSError as exc:
        raise ArtifactError(f"cannot write {out / 'deployment.json'}: {exc.strerror}") from exc
    emit_coverage_map(result.deployment, result.best_bits, cfg.grid, out / "coverage.pgm")


def emit_coverage_map(d: Deployment, cv, g: MonitoringGrid, path) -> dict:
    """Write ``<stem>.pgm``, ``<stem>.txt`` and a ``<stem>.json`` sidecar.

    Returns the written paths keyed by format.
    """
    path = Path(path)
    model = CoverageModel(d, g)
    bits = as_control_vector(cv, d.n)
    covered = model.covered_mask(bits).reshape(g.shape)
    rep = model.evaluate(bits)
    holes = find_coverage_holes(d, bits, g)
    paths = {"pgm": path.with_suffix(".pgm"), "txt": path.with_suffix(".txt"), "json": path.with_suffix(".json")}
    if not path.parent.exists():
        raise ArtifactError(f"output directory {path.parent} does not exist")
    _write(paths["pgm"], to_pgm(covered))
    _write(paths["txt"], to_ascii(covered))
    _write(paths["json"], json.dumps({
        "f1": rep.f1,
        "covered_area": rep.covered_area,
        "active_count": rep.active_count,
        "covered_cells": int(covered.sum()),
        "hole_cells": len(holes.uncovered_cells),
        "holes": holes.n_holes,
    }, indent=1) + "\n")
    return paths


def load_manifest(path) -> list:
    """Configs listed by a manifest ``{"configs": [path-or-object, ...]}``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ArtifactError(f"cannot read manifest {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"manifest {path} is not valid JSON: {exc}") from exc
    entries = data.get("configs") if isinstance(data, dict) else None
    if not entries:
        raise ConfigError(f"manifest {path} lists no configs")
    out = []
    for e in entries:
        if isinstance(e, str):
            out.append(RunConfig.load(path.parent / e))
        else:
            out.append(RunConfig.from_dict(e, path.parent))
    return out


def _worker_count(n_jobs: int, workers=None) -> int:
    if workers is None:
        env = os.environ.get("COVERSET_THREADS", "0")
        try:
            workers = int(env)
        except ValueError as exc:
            raise ConfigError(f"COVERSET_THREADS must be an integer, got {env!r}") from exc
    if workers < 0:
        raise ConfigError("worker count must be non-negative")
    if workers == 0:
        workers = os.cpu_count() or 1
    return max(1, min(workers, n_jobs))


def _run_job(cfg: RunConfig) -> RunResult:
    return run_experiment(cfg)


def compare(configs, seeds, out=None, workers=None):
    """Run every config under every seed and aggregate per checkpoint.

    Returns ``(rows, results)`` where ``rows`` are dicts in
    :data:`COMPARE_HEADER` order (medians with min/max spread across seeds)
    and ``results`` maps ``(label, seed)`` to :class:`RunResult`. With
    ``out`` set, per-run artifacts go to ``out/<label>/seed-<seed>`` and the
    table to ``out/compare.csv``.
    """
    configs = list(configs)
    seeds = [int(s) for s in seeds]
    if not configs or not seeds:
        raise ConfigError("compare needs at least one config and one seed")
    labels = [c.label or c.algorithm for c in configs]
    if len(set(labels)) != len(labels):
        labels = [f"{lab}-{i}" for i, lab in enumerate(labels)]
    jobs, keys = [], []
    for cfg, lab in zip(configs, labels):
        for s in seeds:
            job = cfg.with_overrides(seed=s)
            job.output_dir = str(Path(out) / lab / f"seed-{s}") if out else None
            jobs.append(job)
            keys.append((lab, s))
    n = _worker_count(len(jobs), workers)
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    by_key = dict(zip(keys, results))

    rows = []
    for cfg, lab in zip(configs, labels):
        runs = [by_key[(lab, s)] for s in seeds]
        for i, snap in enumerate(runs[0].snapshots):
            snaps = [r.snapshots[i] for r in runs]
            cov = [s.coverage_pct for s in snaps]
            act = [s.active_count for s in snaps]
            rows.append({
                "label": lab,
                "algorithm": cfg.algorithm,
                "checkpoint": snap.generation,
                "runs": len(snaps),
                "coverage_pct_median": statistics.median(cov),
                "coverage_pct_min": min(cov),
                "coverage_pct_max": max(cov),
                "active_median": statistics.median(act),
                "active_min": min(act),
                "active_max": max(act),
                "combined_median": statistics.median(s.combined for s in snaps),
                "elapsed_ms_median": statistics.median(s.elapsed_ms for s in snaps),
            })
    if out is not None:
        out = Path(out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ArtifactError(f"cannot create output directory {out}: {exc.strerror}") from exc
        _write(out / "compare.csv", rows_to_csv(rows))
    return rows, by_key


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, COMPARE_HEADER, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.4f}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
