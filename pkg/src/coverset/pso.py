"""Particle swarm on ``[0, 1]^N`` with binarized evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coverage import DimensionError
from .framework import Optimizer, Population, Problem, incumbent

__all__ = ["PsoParams", "update_velocity", "update_position", "binarize_particle", "Swarm", "ParticleSwarm"]


@dataclass(frozen=True)
class PsoParams:
    w: float = 0.7
    c1: float = 1.5
    c2: float = 1.5
    v_max: float = 0.5
    swarm: int = 40
    binarize: str = "threshold"

    def __post_init__(self):
        if self.w < 0 or self.c1 < 0 or self.c2 < 0:
            raise ValueError("w, c1 and c2 must be non-negative")
        if not self.v_max > 0:
            raise ValueError(f"v_max must be positive, got {self.v_max}")
        if self.swarm < 1:
            raise ValueError(f"swarm size must be positive, got {self.swarm}")
        if self.binarize not in ("threshold", "stochastic"):
            raise ValueError(f"binarize must be 'threshold' or 'stochastic', got {self.binarize!r}")


def _same_shape(*arrays):
    shape = arrays[0].shape
    if any(a.shape != shape for a in arrays[1:]):
        raise DimensionError(f"vectors differ in dimension: {[a.shape for a in arrays]}")


def update_velocity(v, x, x_best, x_gbest, p: PsoParams, rng) -> np.ndarray:
    v, x, x_best, x_gbest = (np.asarray(a, dtype=float) for a in (v, x, x_best, x_gbest))
    _same_shape(v, x, x_best, x_gbest)
    r1 = rng.random(v.shape)
    r2 = rng.random(v.shape)
    v_new = p.w * v + p.c1 * r1 * (x_best - x) + p.c2 * r2 * (x_gbest - x)
    return np.clip(v_new, -p.v_max, p.v_max)


def update_position(x, v_new) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    v_new = np.asarray(v_new, dtype=float)
    _same_shape(x, v_new)
    return np.clip(x + v_new, 0.0, 1.0)


def binarize_particle(x, rng=None, stochastic: bool = False) -> np.ndarray:
    """Threshold at 0.5, or with ``stochastic`` switch bit j on with probability x[j]."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("particle components must lie in [0, 1]")
    if stochastic:
        if rng is None:
            raise ValueError("stochastic binarization needs a random stream")
        return rng.random(x.shape) < x
    return x >= 0.5


@dataclass
class Swarm(Population):
    velocity: np.ndarray | None = field(default=None)
    pbest: np.ndarray | None = field(default=None)
    pbest_fitness: np.ndarray | None = field(default=None)


class ParticleSwarm(Optimizer):
    name = "pso"

    def __init__(self, problem: Problem, params: PsoParams | None = None):
        super().__init__(problem)
        self.params = params or PsoParams()

    def _bits(self, x, rng):
        return binarize_particle(x, rng, self.params.binarize == "stochastic")

    def initialize(self, rng, size=None):
        size = size or self.params.swarm
        x = rng.random((size, self.n))
        v = rng.uniform(-self.params.v_max, self.params.v_max, x.shape)
        bits = self._bits(x, rng)
        swarm = self._population(x, bits, cls=Swarm, velocity=v)
        swarm.pbest = x.copy()
        swarm.pbest_fitness = swarm.fitness
        return swarm

    def step(self, pop: Swarm, rng) -> Swarm:
        self.check(pop)
        gbest = pop.best.genome
        v = update_velocity(pop.velocity, pop.genomes, pop.pbest, np.broadcast_to(gbest, pop.genomes.shape),
                            self.params, rng)
        x = update_position(pop.genomes, v)
        bits = self._bits(x, rng)
        reports = self.problem.evaluate_batch(bits)
        fit = np.array([r.combined for r in reports])
        improved = fit > pop.pbest_fitness
        pbest = np.where(improved[:, None], x, pop.pbest)
        pbest_fit = np.where(improved, fit, pop.pbest_fitness)
        best = incumbent(pop.best, x, bits, reports)
        return Swarm(x, bits, reports, best, pop.generation + 1, velocity=v, pbest=pbest, pbest_fitness=pbest_fit)
