"""Population-iteration machinery shared by every optimizer.

An optimizer maps a population at generation ``t`` to the population at
``t + 1`` given its parameters and a random stream. Random streams are numpy
``Generator`` objects backed by PCG64, so a seed pins every draw.
"""

from __future__ import annotations

import io
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .coverage import CoverageModel, DimensionError, FitnessReport

__all__ = [
    "make_rng",
    "Problem",
    "Candidate",
    "Population",
    "Termination",
    "TraceRecord",
    "ConvergenceTrace",
    "Optimizer",
    "run",
    "roulette_probabilities",
    "InvariantError",
]

TRACE_HEADER = "generation,best_combined,best_f1,best_active,wallclock_ms"


class InvariantError(RuntimeError):
    """An internal guarantee (elitism, size conservation, ...) was broken."""


def make_rng(seed=None) -> np.random.Generator:
    """PCG64-backed generator; the algorithm is fixed so traces are portable."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


class Problem:
    """Evaluation context: a coverage model plus a fitness cache keyed by bits."""

    def __init__(self, model: CoverageModel):
        self.model = model
        self._cache: dict[bytes, FitnessReport] = {}
        self.n_evals = 0

    @property
    def n(self) -> int:
        return self.model.n

    def evaluate(self, bits) -> FitnessReport:
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (self.n,):
            raise DimensionError(f"genome of shape {bits.shape} does not match {self.n} sensors")
        key = np.packbits(bits).tobytes()
        rep = self._cache.get(key)
        if rep is None:
            rep = self._cache[key] = self.model.evaluate(bits)
            self.n_evals += 1
        return rep

    def evaluate_batch(self, genomes) -> list[FitnessReport]:
        genomes = np.asarray(genomes, dtype=bool)
        if genomes.ndim != 2 or genomes.shape[1] != self.n:
            raise DimensionError(f"population of shape {genomes.shape} does not match {self.n} sensors")
        keys = [k.tobytes() for k in np.packbits(genomes, axis=1)]
        missing = [i for i, k in enumerate(keys) if k not in self._cache]
        if missing:
            for i, rep in zip(missing, self.model.evaluate_many(genomes[missing])):
                self._cache[keys[i]] = rep
            self.n_evals += len(missing)
        return [self._cache[k] for k in keys]


@dataclass(frozen=True)
class Candidate:
    genome: np.ndarray
    bits: np.ndarray
    report: FitnessReport

    @property
    def fitness(self) -> float:
        return self.report.combined


@dataclass
class Population:
    """A generation of candidate genomes.

    ``genomes`` is ``(P, N)``: bool for the discrete optimizers, float in
    ``[0, 1]`` for the continuous ones. ``bits`` holds the binarized view used
    for evaluation. ``best`` is the incumbent best seen so far.
    """

    genomes: np.ndarray
    bits: np.ndarray
    reports: list
    best: Candidate
    generation: int = 0

    def __post_init__(self):
        if len(self.genomes) == 0:
            raise ValueError("population must not be empty")
        if self.genomes.shape != self.bits.shape or len(self.reports) != len(self.genomes):
            raise DimensionError("genomes, bits and reports disagree in shape")

    @property
    def size(self) -> int:
        return len(self.genomes)

    @property
    def dim(self) -> int:
        return self.genomes.shape[1]

    @property
    def fitness(self) -> np.ndarray:
        return np.array([r.combined for r in self.reports])

    @property
    def members(self) -> list[Candidate]:
        return [Candidate(g, b, r) for g, b, r in zip(self.genomes, self.bits, self.reports)]

    def argbest(self) -> int:
        return int(np.argmax(self.fitness))


def incumbent(best: Candidate | None, genomes, bits, reports) -> Candidate:
    """Best of the previous incumbent and the given members (first wins ties)."""
    fit = np.array([r.combined for r in reports])
    k = int(np.argmax(fit))
    if best is None or fit[k] > best.fitness:
        return Candidate(genomes[k].copy(), bits[k].copy(), reports[k])
    return best


def roulette_probabilities(fitness) -> np.ndarray:
    """Fitness-proportional probabilities; uniform when all fitness is zero."""
    f = np.asarray(fitness, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("need a non-empty 1-D fitness vector")
    if np.any(f < 0):
        raise ValueError("roulette selection needs non-negative fitness")
    total = f.sum()
    if total <= 0:
        return np.full(f.size, 1.0 / f.size)
    return f / total


@dataclass(frozen=True)
class Termination:
    max_generations: int
    target: float | None = None

    def __post_init__(self):
        if int(self.max_generations) != self.max_generations or self.max_generations < 1:
            raise ValueError(f"max_generations must be a positive integer, got {self.max_generations}")


class TraceRecord(NamedTuple):
    generation: int
    best_combined: float
    best_f1: float
    best_active: int
    wallclock_ms: float


@dataclass
class ConvergenceTrace:
    records: list = field(default_factory=list)

    def append(self, generation: int, best: Candidate, wallclock_ms: float) -> None:
        if self.records:
            last = self.records[-1]
            if generation <= last.generation:
                raise InvariantError(f"generation {generation} does not follow {last.generation}")
            if best.fitness < last.best_combined:
                raise InvariantError(
                    f"best-so-far fitness fell from {last.best_combined} to {best.fitness} at generation {generation}"
                )
        r = best.report
        self.records.append(TraceRecord(generation, r.combined, r.f1, r.active_count, wallclock_ms))

    def __len__(self):
        return len(self.records)

    def at(self, generation: int) -> TraceRecord:
        for rec in self.records:
            if rec.generation == generation:
                return rec
        raise KeyError(f"no trace record for generation {generation}")

    @property
    def last(self) -> TraceRecord:
        return self.records[-1]

    def to_csv(self, timing: bool = True) -> str:
        """CSV text; with ``timing=False`` the wallclock column is left empty.

        Floats use ``repr`` so values round-trip exactly.
        """
        out = io.StringIO()
        out.write(TRACE_HEADER + "\n")
        for rec in self.records:
            ms = f"{rec.wallclock_ms:.3f}" if timing else ""
            out.write(f"{rec.generation},{float(rec.best_combined)!r},{float(rec.best_f1)!r},{rec.best_active},{ms}\n")
        return out.getvalue()


class Optimizer(ABC):
    """Base class: subclasses implement :meth:`initialize` and :meth:`step`.

    ``step`` must keep the population size, never lose the incumbent and
    consume randomness only from the stream it is given.
    """

    name = "optimizer"

    def __init__(self, problem: Problem):
        self.problem = problem

    @property
    def n(self) -> int:
        return self.problem.n

    @abstractmethod
    def initialize(self, rng: np.random.Generator) -> Population: ...

    @abstractmethod
    def step(self, pop: Population, rng: np.random.Generator) -> Population: ...

    def check(self, pop: Population) -> None:
        if pop.dim != self.n:
            raise DimensionError(f"population dimension {pop.dim} does not match {self.n} sensors")

    def _population(self, genomes, bits, prev_best=None, generation=0, cls=Population, **extra):
        reports = self.problem.evaluate_batch(bits)
        best = incumbent(prev_best, genomes, bits, reports)
        return cls(genomes, bits, reports, best, generation, **extra)


def run(
    optimizer: Optimizer,
    termination: Termination,
    rng: np.random.Generator,
    initial: Population | None = None,
    trace: ConvergenceTrace | None = None,
    generation_offset: int = 0,
    on_generation: Callable[[Population], None] | None = None,
    started: float | None = None,
):
    """Iterate ``optimizer`` until the generation budget or target is hit.

    One trace record is appended per generation, numbered from
    ``generation_offset + 1``. Wallclock is measured from ``started`` (a
    ``time.perf_counter()`` value) when given. Returns
    ``(best, trace, population)``.
    """
    pop = optimizer.initialize(rng) if initial is None else initial
    optimizer.check(pop)
    trace = ConvergenceTrace() if trace is None else trace
    size = pop.size
    t0 = time.perf_counter() if started is None else started
    for k in range(1, termination.max_generations + 1):
        prev = pop.best.fitness
        pop = optimizer.step(pop, rng)
        if pop.size != size:
            raise InvariantError(f"{optimizer.name} changed population size {size} -> {pop.size}")
        if pop.best.fitness < prev:
            raise InvariantError(f"{optimizer.name} lost its incumbent best")
        pop = replace(pop, generation=generation_offset + k)
        trace.append(generation_offset + k, pop.best, (time.perf_counter() - t0) * 1e3)
        if on_generation is not None:
            on_generation(pop)
        if termination.target is not None and pop.best.fitness >= termination.target:
            break
    return pop.best, trace, pop
