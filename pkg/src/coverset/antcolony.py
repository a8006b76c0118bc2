"""Binary ant colony (BACA) and the IGA -> BACA pipeline.

Every bit of the control vector is a junction with exactly two outgoing
branches (bit = 0 and bit = 1), so the whole pheromone state fits in a
``2 x N`` table. Row 0 holds the bit-0 branch trails, row 1 the bit-1 ones.
Trails are kept inside ``[tau_min, tau_max]`` after every change (Max-Min
rule).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .coverage import DimensionError
from .framework import (
    ConvergenceTrace,
    Optimizer,
    Population,
    Problem,
    Termination,
    incumbent,
    roulette_probabilities,
    run,
)
from .genetic import AdaptiveGA, AdaptiveGaParams

__all__ = [
    "AcoParams",
    "PheromoneTable",
    "init_pheromones",
    "transition_probability",
    "branch_probabilities",
    "construct_solution",
    "update_pheromones",
    "select_elite",
    "seed_from_population",
    "AntColony",
    "BinaryAntColony",
    "IgaBacaConfig",
    "iga_baca_run",
]

DEPOSIT_MODES = ("fitness", "inverse")
HEURISTICS = ("none", "gain")


@dataclass(frozen=True)
class AcoParams:
    """Ant colony settings.

    ``deposit`` selects the trail increment on the elite path: ``"fitness"``
    deposits the elite fitness (rewards high fitness, the default for this
    maximization problem), ``"inverse"`` deposits its reciprocal as in
    cost-minimizing ant systems. ``heuristic`` chooses the visibility:
    ``"none"`` gives both branches visibility 1, ``"gain"`` scales the bit-1
    branch by the sensor's stand-alone cell count relative to the mean.
    """

    alpha: float = 1.0
    beta: float = 6.0
    rho: float = 0.8
    n_ants: int = 40
    initial_c: float = 10.0
    tau_min: float = 0.01
    tau_max: float = 10.0
    deposit: str = "fitness"
    heuristic: str = "none"

    def __post_init__(self):
        if self.alpha < 1 or self.beta < 1:
            raise ValueError(f"alpha and beta must be >= 1, got {self.alpha}, {self.beta}")
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if self.n_ants < 1:
            raise ValueError(f"n_ants must be positive, got {self.n_ants}")
        if not 0 < self.tau_min <= self.tau_max:
            raise ValueError(f"need 0 < tau_min <= tau_max, got {self.tau_min}, {self.tau_max}")
        if self.deposit not in DEPOSIT_MODES:
            raise ValueError(f"deposit must be one of {DEPOSIT_MODES}, got {self.deposit!r}")
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"heuristic must be one of {HEURISTICS}, got {self.heuristic!r}")


@dataclass(frozen=True)
class PheromoneTable:
    tau: np.ndarray
    tau_min: float
    tau_max: float

    def __post_init__(self):
        tau = np.array(self.tau, dtype=float)
        if tau.ndim != 2 or tau.shape[0] != 2:
            raise DimensionError(f"pheromone table must be 2 x N, got {tau.shape}")
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)

    @property
    def n(self) -> int:
        return self.tau.shape[1]

    def clamped(self, tau) -> "PheromoneTable":
        return PheromoneTable(np.clip(tau, self.tau_min, self.tau_max), self.tau_min, self.tau_max)


def init_pheromones(n_bits: int, p: AcoParams = AcoParams()) -> PheromoneTable:
    if n_bits < 1:
        raise ValueError(f"n_bits must be positive, got {n_bits}")
    c = min(max(p.initial_c, p.tau_min), p.tau_max)
    return PheromoneTable(np.full((2, n_bits), c), p.tau_min, p.tau_max)


def transition_probability(tau0, tau1, eta0, eta1, alpha, beta):
    """Probabilities of taking the 0- and 1-branch at one junction."""
    w0 = tau0**alpha * eta0**beta
    w1 = tau1**alpha * eta1**beta
    total = w0 + w1
    if total <= 0:
        raise RuntimeError("both branch weights vanished; trails must stay positive")
    return w0 / total, w1 / total


def branch_probabilities(ph: PheromoneTable, eta, alpha: float, beta: float) -> np.ndarray:
    """Vectorized probability of choosing bit 1 at every junction."""
    eta = np.broadcast_to(np.asarray(eta, dtype=float), ph.tau.shape)
    w = ph.tau**alpha * eta**beta
    total = w[0] + w[1]
    if np.any(total <= 0):
        raise RuntimeError("both branch weights vanished; trails must stay positive")
    return w[1] / total


def visibility(problem: Problem | None, p: AcoParams, n: int) -> np.ndarray:
    eta = np.ones((2, n))
    if p.heuristic == "gain" and problem is not None:
        cells = problem.model.incidence.sum(axis=1).astype(float)
        if cells.mean() > 0:
            eta[1] = np.maximum(cells / cells.mean(), 1e-3)
    return eta


def construct_solution(ph: PheromoneTable, p: AcoParams, rng: np.random.Generator, eta=1.0, n_ants: int | None = None):
    """Let ants walk the digraph; one control vector per ant.

    Returns a single vector when ``n_ants`` is None, else an
    ``(n_ants, N)`` array.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.ndim == 2 and eta.shape != ph.tau.shape:
        raise DimensionError(f"visibility shape {eta.shape} does not match table {ph.tau.shape}")
    p1 = branch_probabilities(ph, eta, p.alpha, p.beta)
    if n_ants is None:
        return rng.random(ph.n) < p1
    return rng.random((n_ants, ph.n)) < p1


def update_pheromones(ph: PheromoneTable, elite, elite_fitness: float, p: AcoParams) -> PheromoneTable:
    """Evaporate every trail, reinforce the elite path, clamp to the bounds."""
    if not elite_fitness > 0:
        raise ValueError(f"elite fitness must be positive, got {elite_fitness}")
    elite = np.asarray(elite, dtype=bool)
    if elite.shape != (ph.n,):
        raise DimensionError(f"elite of length {elite.shape} does not match table with {ph.n} bits")
    delta = elite_fitness if p.deposit == "fitness" else 1.0 / elite_fitness
    tau = p.rho * ph.tau
    cols = np.arange(ph.n)
    tau[elite.astype(int), cols] += delta
    return ph.clamped(tau)


def select_elite(fitness, rng: np.random.Generator) -> int:
    """Index of the offspring elected to lay pheromone, drawn proportional to fitness."""
    probs = roulette_probabilities(fitness)
    return int(rng.choice(probs.size, p=probs))


def seed_from_population(genomes, fitness, p: AcoParams = AcoParams()) -> PheromoneTable:
    """Initial trails from fitness-weighted bit frequencies of a population.

    The branch weight of ``(b, j)`` is the summed fitness of members whose
    bit ``j`` equals ``b``. Each junction's weight share is mapped linearly
    onto ``[tau_min, tau_max]``. With zero total fitness members count
    equally.
    """
    genomes = np.asarray(genomes, dtype=bool)
    fitness = np.asarray(fitness, dtype=float)
    if genomes.ndim != 2 or genomes.shape[0] == 0:
        raise ValueError("cannot seed pheromones from an empty population")
    if fitness.shape != (genomes.shape[0],):
        raise DimensionError("fitness vector does not match population size")
    w = fitness if fitness.sum() > 0 else np.ones_like(fitness)
    w1 = w @ genomes
    w0 = w.sum() - w1
    share = np.stack((w0, w1)) / w.sum()
    return PheromoneTable(p.tau_min + share * (p.tau_max - p.tau_min), p.tau_min, p.tau_max)


@dataclass
class AntColony(Population):
    pheromone: PheromoneTable | None = field(default=None)


class BinaryAntColony(Optimizer):
    """One generation: every ant builds a vector, an elite lays pheromone."""

    name = "baca"

    def __init__(self, problem: Problem, params: AcoParams | None = None):
        super().__init__(problem)
        self.params = params or AcoParams()
        self.eta = visibility(problem, self.params, problem.n)

    def _colony(self, ph, rng, prev_best=None, generation=0) -> AntColony:
        ants = construct_solution(ph, self.params, rng, self.eta, self.params.n_ants)
        return self._population(ants, ants, prev_best, generation, cls=AntColony, pheromone=ph)

    def initialize(self, rng, pheromone: PheromoneTable | None = None, best=None):
        ph = pheromone if pheromone is not None else init_pheromones(self.n, self.params)
        if ph.n != self.n:
            raise DimensionError(f"pheromone table has {ph.n} bits, problem has {self.n}")
        return self._colony(ph, rng, best)

    def step(self, pop: AntColony, rng) -> AntColony:
        self.check(pop)
        ph = pop.pheromone if pop.pheromone is not None else init_pheromones(self.n, self.params)
        fit = pop.fitness
        if fit.max() > 0:
            k = select_elite(fit, rng)
            ph = update_pheromones(ph, pop.bits[k], fit[k], self.params)
        new = self._colony(ph, rng, pop.best, pop.generation + 1)
        if new.best is pop.best:
            worst = int(np.argmin(new.fitness))
            new.genomes[worst] = pop.best.bits
            new.reports[worst] = pop.best.report
        return new


@dataclass(frozen=True)
class IgaBacaConfig:
    """Phase lengths for the combined run.

    Each outer loop runs ``iga_generations`` of the adaptive GA, seeds the
    ant colony's trails from the final GA population, then runs
    ``baca_generations`` of the colony; the next loop's GA starts from the
    colony's last ants.
    """

    iga: AdaptiveGaParams = AdaptiveGaParams()
    aco: AcoParams = AcoParams()
    iga_generations: int = 150
    baca_generations: int = 150
    outer_loops: int = 1

    def __post_init__(self):
        if self.iga_generations < 1 or self.baca_generations < 1 or self.outer_loops < 1:
            raise ValueError("phase lengths and outer loop count must all be positive")

    @classmethod
    def for_budget(cls, generations: int, iga=None, aco=None, outer_loops: int = 1):
        """Split ``generations`` evenly: GA first, colony second, per loop."""
        per_loop = generations // outer_loops
        g_iga = max(1, per_loop // 2)
        return cls(iga or AdaptiveGaParams(), aco or AcoParams(), g_iga, max(1, per_loop - g_iga), outer_loops)

    @property
    def total_generations(self) -> int:
        return self.outer_loops * (self.iga_generations + self.baca_generations)


def iga_baca_run(problem: Problem, config: IgaBacaConfig, rng: np.random.Generator, target: float | None = None,
                 on_generation=None):
    """Run the IGA -> BACA pipeline; returns ``(best, trace, population)``.

    Generations are numbered continuously across phases and loops, and the
    incumbent is carried through every hand-over.
    """
    ga = AdaptiveGA(problem, config.iga)
    colony = BinaryAntColony(problem, config.aco)
    trace = ConvergenceTrace()
    started = time.perf_counter()
    gen = 0
    best = None
    pop = ga.initialize(rng)
    for loop in range(config.outer_loops):
        if loop > 0:
            pop = ga.from_genomes(pop.bits, best, gen)
        best, trace, pop = run(ga, Termination(config.iga_generations, target), rng, pop, trace, gen,
                               on_generation, started)
        gen = trace.last.generation
        if target is not None and best.fitness >= target:
            break
        ph = seed_from_population(pop.bits, pop.fitness, config.aco)
        pop = colony.initialize(rng, ph, best)
        best, trace, pop = run(colony, Termination(config.baca_generations, target), rng, pop, trace, gen,
                               on_generation, started)
        gen = trace.last.generation
        if target is not None and best.fitness >= target:
            break
    return best, trace, pop
