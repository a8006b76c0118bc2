"""Adaptive (improved) genetic algorithm on binary control vectors.

Crossover and mutation probabilities adapt to where an individual sits
between the population average and maximum fitness; above-average
individuals are disturbed less.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coverage import DimensionError
from .framework import Optimizer, Population, Problem, incumbent, roulette_probabilities

__all__ = [
    "AdaptiveGaParams",
    "raw_crossover_prob",
    "raw_mutation_prob",
    "adaptive_crossover_prob",
    "adaptive_mutation_prob",
    "select_reproduce",
    "crossover",
    "mutate",
    "AdaptiveGA",
]


@dataclass(frozen=True)
class AdaptiveGaParams:
    k1: float = 1.0
    k2: float = 0.5
    k3: float = 1.0
    k4: float = 0.5
    pc_clamp: tuple = (0.5, 1.0)
    pm_clamp: tuple = (0.001, 0.05)
    population: int = 40
    init_density: float = 0.5

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "k4"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if self.k1 < self.k2 or self.k3 < self.k4:
            raise ValueError("k1 and k3 must not be smaller than k2 and k4")
        for name in ("pc_clamp", "pm_clamp"):
            lo, hi = getattr(self, name)
            if not 0 <= lo <= hi <= 1:
                raise ValueError(f"{name} must be an ordered sub-interval of [0, 1], got {(lo, hi)}")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if self.population < 2:
            raise ValueError(f"population must be at least 2, got {self.population}")
        if not 0 < self.init_density < 1:
            raise ValueError(f"init_density must lie in (0, 1), got {self.init_density}")


def _adaptive(f, f_max, f_avg, k_above, k_below):
    if f_max < f_avg:
        raise ValueError(f"f_max ({f_max}) is below f_avg ({f_avg})")
    if f_max == f_avg or f <= f_avg:
        return k_below
    return k_above * (f_max - f) / (f_max - f_avg)


def raw_crossover_prob(f_prime, f_max, f_avg, p: AdaptiveGaParams = AdaptiveGaParams()) -> float:
    """Unclamped crossover probability; ``f_prime`` is the fitter parent's fitness."""
    return _adaptive(f_prime, f_max, f_avg, p.k1, p.k3)


def raw_mutation_prob(f, f_max, f_avg, p: AdaptiveGaParams = AdaptiveGaParams()) -> float:
    return _adaptive(f, f_max, f_avg, p.k2, p.k4)


def adaptive_crossover_prob(f_prime, f_max, f_avg, p: AdaptiveGaParams = AdaptiveGaParams()) -> float:
    lo, hi = p.pc_clamp
    return min(max(raw_crossover_prob(f_prime, f_max, f_avg, p), lo), hi)


def adaptive_mutation_prob(f, f_max, f_avg, p: AdaptiveGaParams = AdaptiveGaParams()) -> float:
    lo, hi = p.pm_clamp
    return min(max(raw_mutation_prob(f, f_max, f_avg, p), lo), hi)


def select_reproduce(fitness, rng: np.random.Generator) -> np.ndarray:
    """Indices of a roulette-wheel resample of the population.

    The incumbent (index of the maximum fitness) always occupies slot 0; the
    remaining ``n - 1`` slots are drawn with probability proportional to
    fitness, uniformly if every fitness is zero.
    """
    fitness = np.asarray(fitness, dtype=float)
    probs = roulette_probabilities(fitness)
    best = int(np.argmax(fitness))
    drawn = rng.choice(fitness.size, size=fitness.size - 1, p=probs)
    return np.concatenate(([best], drawn)).astype(int)


def crossover(a, b, pc: float, rng: np.random.Generator):
    """Single-point crossover applied with probability ``pc``.

    The cut falls after position ``k``, ``k`` uniform in ``[1, N - 1]``.
    """
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise DimensionError(f"parents differ in length: {a.shape} vs {b.shape}")
    n = a.shape[0]
    if n < 2 or rng.random() >= pc:
        return a.copy(), b.copy()
    cut = int(rng.integers(1, n))
    return single_point(a, b, cut)


def single_point(a, b, cut: int):
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    return np.concatenate((a[:cut], b[cut:])), np.concatenate((b[:cut], a[cut:]))


def mutate(v, pm: float, rng: np.random.Generator) -> np.ndarray:
    if not 0 <= pm <= 1:
        raise ValueError(f"mutation probability must lie in [0, 1], got {pm}")
    v = np.asarray(v, dtype=bool)
    return v ^ (rng.random(v.shape[0]) < pm)


class AdaptiveGA(Optimizer):
    """Reproduction, adaptive crossover and adaptive mutation, with elitism."""

    name = "iga"

    def __init__(self, problem: Problem, params: AdaptiveGaParams | None = None):
        super().__init__(problem)
        self.params = params or AdaptiveGaParams()

    def initialize(self, rng, size=None):
        size = size or self.params.population
        genomes = rng.random((size, self.n)) < self.params.init_density
        return self._population(genomes, genomes)

    def from_genomes(self, genomes, best=None, generation=0):
        genomes = np.asarray(genomes, dtype=bool).copy()
        return self._population(genomes, genomes, best, generation)

    def step(self, pop: Population, rng) -> Population:
        self.check(pop)
        p = self.params
        fit = pop.fitness
        chosen = select_reproduce(fit, rng)
        parents = pop.genomes[chosen]
        pfit = fit[chosen]
        f_max, f_avg = float(fit.max()), float(fit.mean())

        order = rng.permutation(len(chosen))
        children = parents.copy()
        for a, b in zip(order[0::2], order[1::2]):
            pc = adaptive_crossover_prob(max(pfit[a], pfit[b]), f_max, f_avg, p)
            children[a], children[b] = crossover(parents[a], parents[b], pc, rng)

        # mutation rate follows each child's own fitness
        child_fit = np.array([r.combined for r in self.problem.evaluate_batch(children)])
        for i in range(len(children)):
            pm = adaptive_mutation_prob(min(child_fit[i], f_max), f_max, f_avg, p)
            children[i] = mutate(children[i], pm, rng)

        reports = self.problem.evaluate_batch(children)
        best = incumbent(pop.best, children, children, reports)
        if best is pop.best:
            # re-inject the incumbent over the worst child
            worst = int(np.argmin([r.combined for r in reports]))
            children[worst] = best.bits
            reports[worst] = best.report
        return Population(children, children, reports, best, pop.generation + 1)
