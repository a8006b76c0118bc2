"""Lion optimization over a continuous relaxation of the control vector.

Each lion is a point in ``[0, 1]^N``; coordinate ``j`` at or above the
threshold switches sensor ``j`` on. Resident lions live in prides whose
females hunt cooperatively; nomads are the mating pool. A generation is one
hunt in every pride followed by mating with the best nomads, sorting and
elimination of the weakest nomads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coverage import DimensionError
from .framework import Optimizer, Population, Problem, incumbent

__all__ = [
    "LionParams",
    "MidpointRng",
    "binarize",
    "prey_escape",
    "encircle_wing",
    "encircle_center",
    "hunter_groups",
    "hunt",
    "mate_sort_eliminate",
    "Prides",
    "LionOptimizer",
]

NOMAD = -1


@dataclass(frozen=True)
class LionParams:
    population: int = 40
    nomad_fraction: float = 0.2
    prides: int = 4
    female_fraction: float = 0.8
    mating_prob: float = 1.0
    mutation_rate: float = 0.05
    binarize_threshold: float = 0.5

    def __post_init__(self):
        if self.population < 4:
            raise ValueError(f"population must be at least 4, got {self.population}")
        if self.prides < 1:
            raise ValueError(f"need at least one pride, got {self.prides}")
        for name in ("nomad_fraction", "female_fraction", "binarize_threshold"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        for name in ("mating_prob", "mutation_rate"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.population - self.n_nomads < self.prides:
            raise ValueError("not enough residents to populate every pride")

    @property
    def n_nomads(self) -> int:
        return max(1, int(round(self.nomad_fraction * self.population)))


class MidpointRng:
    """Stand-in random stream returning interval midpoints.

    Makes the hunting operators plain arithmetic, for checking by hand.
    """

    def uniform(self, low=0.0, high=1.0, size=None):
        return (np.asarray(low, dtype=float) + np.asarray(high, dtype=float)) / 2

    def random(self, size=None):
        return 0.5 if size is None else np.full(size, 0.5)


def binarize(coords, threshold: float = 0.5) -> np.ndarray:
    coords = np.asarray(coords, dtype=float)
    if np.any(coords < 0) or np.any(coords > 1):
        raise ValueError("lion coordinates must lie in [0, 1]")
    return coords >= threshold


def prey_escape(prey, hunter, pi: float, rng) -> np.ndarray:
    """Prey flees away from ``hunter``, further the larger the improvement ``pi``."""
    prey = np.asarray(prey, dtype=float)
    hunter = np.asarray(hunter, dtype=float)
    if prey.shape != hunter.shape:
        raise DimensionError(f"prey {prey.shape} and hunter {hunter.shape} differ in dimension")
    if pi < 0:
        raise ValueError(f"improvement fraction must be non-negative, got {pi}")
    return np.clip(prey + rng.random() * pi * (prey - hunter), 0.0, 1.0)


def encircle_wing(hunter, prey, rng) -> np.ndarray:
    """Wing hunters jump somewhere between the prey and their mirror image through it."""
    hunter = np.asarray(hunter, dtype=float)
    prey = np.asarray(prey, dtype=float)
    mirror = 2 * prey - hunter
    out = rng.uniform(np.minimum(mirror, prey), np.maximum(mirror, prey))
    return np.clip(out, 0.0, 1.0)


def encircle_center(hunter, prey, rng) -> np.ndarray:
    """Center hunters close in somewhere between themselves and the prey."""
    hunter = np.asarray(hunter, dtype=float)
    prey = np.asarray(prey, dtype=float)
    out = rng.uniform(np.minimum(hunter, prey), np.maximum(hunter, prey))
    return np.clip(out, 0.0, 1.0)


def hunter_groups(fitness) -> np.ndarray:
    """Group label per hunter: 0 center, 1 left wing, 2 right wing.

    Hunters are ranked by fitness (ties by index); the best third (rounded
    up) forms the center and the rest alternate between the wings.
    """
    fitness = np.asarray(fitness, dtype=float)
    order = np.argsort(-fitness, kind="stable")
    n_center = -(-len(order) // 3)
    groups = np.empty(len(order), dtype=int)
    groups[order[:n_center]] = 0
    groups[order[n_center:]] = 1 + np.arange(len(order) - n_center) % 2
    return groups


def hunt(hunters, fitness, evaluate, rng, prey=None):
    """One cooperative hunt.

    Parameters
    ----------
    hunters : ndarray, shape (H, N)
        Hunter positions.
    fitness : ndarray, shape (H,)
        Their current fitness.
    evaluate : callable
        Maps a position to its fitness.
    rng : Generator or MidpointRng
    prey : ndarray, optional
        Starting prey position; defaults to the hunters' mean.

    Returns
    -------
    (positions, fitness, prey)
        A hunter keeps its new position unless it is worse than the old
        one. Whenever a hunter improves by a relative fraction PI the prey
        escapes with that PI (PI is 1 if the old fitness was 0).
    """
    hunters = np.array(hunters, dtype=float)
    fitness = np.array(fitness, dtype=float)
    if hunters.ndim != 2 or len(hunters) == 0:
        raise ValueError("a hunt needs at least one hunter")
    prey = hunters.mean(axis=0) if prey is None else np.array(prey, dtype=float)
    groups = hunter_groups(fitness)
    for i in range(len(hunters)):
        move = encircle_center if groups[i] == 0 else encircle_wing
        new = move(hunters[i], prey, rng)
        if np.array_equal(new, hunters[i]):
            continue
        f_new = evaluate(new)
        f_old = fitness[i]
        if f_new > f_old:
            pi = (f_new - f_old) / f_old if f_old > 0 else 1.0
            prey = prey_escape(prey, new, pi, rng)
        if f_new >= f_old:
            hunters[i] = new
            fitness[i] = f_new
    return hunters, fitness, prey


@dataclass
class Prides(Population):
    """Population plus each lion's pride (``-1`` for nomads) and sex."""

    pride: np.ndarray | None = field(default=None)
    female: np.ndarray | None = field(default=None)


def _blend(a, b, rng, mutation_rate):
    beta = rng.random()
    kids = np.stack((beta * a + (1 - beta) * b, (1 - beta) * a + beta * b))
    hit = rng.random(kids.shape) < mutation_rate
    kids[hit] = rng.random(np.count_nonzero(hit))
    return kids


def mate_sort_eliminate(pop: Prides, params: LionParams, problem: Problem, rng) -> Prides:
    """Mate residents with the best nomads, then cull the weakest nomads.

    With probability ``mating_prob`` every resident female mates with the
    best nomad male and every resident male with the best nomad female. Each
    mating yields a female and a male cub (blend crossover plus uniform
    reset mutation) that join the nomads. Nomads of each sex are then
    trimmed back to their previous head count, dropping the least fit, and
    the whole population is returned sorted by fitness (best first).
    """
    if pop.size < 4:
        raise ValueError(f"lion population must hold at least 4 lions, got {pop.size}")
    fit = pop.fitness
    nomad = pop.pride == NOMAD
    pos = [pop.genomes]
    sexes = [pop.female]
    for parent_sex in (True, False):
        mates = np.flatnonzero(nomad & (pop.female != parent_sex))
        if mates.size == 0:
            continue
        mate = mates[np.argmax(fit[mates])]
        for i in np.flatnonzero(~nomad & (pop.female == parent_sex)):
            if rng.random() < params.mating_prob:
                pos.append(_blend(pop.genomes[i], pop.genomes[mate], rng, params.mutation_rate))
                sexes.append(np.array([True, False]))

    genomes = np.concatenate([np.atleast_2d(p) for p in pos])
    female = np.concatenate(sexes)
    pride = np.concatenate((pop.pride, np.full(len(genomes) - pop.size, NOMAD)))
    bits = genomes >= params.binarize_threshold
    reports = list(pop.reports) + problem.evaluate_batch(bits[pop.size:]) if len(genomes) > pop.size else list(pop.reports)
    fit = np.array([r.combined for r in reports])

    keep = pride != NOMAD
    for sex in (True, False):
        quota = np.count_nonzero(nomad & (pop.female == sex))
        cand = np.flatnonzero((pride == NOMAD) & (female == sex))
        keep[cand[np.argsort(-fit[cand], kind="stable")[:quota]]] = True
    idx = np.flatnonzero(keep)
    idx = idx[np.argsort(-fit[idx], kind="stable")]
    best = incumbent(pop.best, genomes[idx], bits[idx], [reports[k] for k in idx])
    return Prides(genomes[idx], bits[idx], [reports[k] for k in idx], best, pop.generation,
                  pride=pride[idx], female=female[idx])


class LionOptimizer(Optimizer):
    name = "lo"

    def __init__(self, problem: Problem, params: LionParams | None = None):
        super().__init__(problem)
        self.params = params or LionParams()

    def _eval(self, coords) -> float:
        return self.problem.evaluate(coords >= self.params.binarize_threshold).combined

    def initialize(self, rng, size=None):
        p = self.params
        n_pop = p.population
        genomes = rng.random((n_pop, self.n))
        n_nomads = p.n_nomads
        pride = np.full(n_pop, NOMAD)
        residents = n_pop - n_nomads
        pride[:residents] = np.arange(residents) % p.prides
        female = np.zeros(n_pop, dtype=bool)
        for k in range(p.prides):
            members = np.flatnonzero(pride == k)
            n_f = min(len(members), max(1, int(round(p.female_fraction * len(members)))))
            female[rng.choice(members, n_f, replace=False)] = True
        nomads = np.flatnonzero(pride == NOMAD)
        n_f = int(round((1 - p.female_fraction) * len(nomads)))
        if n_f:
            female[rng.choice(nomads, n_f, replace=False)] = True
        bits = genomes >= p.binarize_threshold
        return self._population(genomes, bits, cls=Prides, pride=pride, female=female)

    def step(self, pop: Prides, rng) -> Prides:
        self.check(pop)
        genomes = pop.genomes.copy()
        fit = pop.fitness
        for k in range(self.params.prides):
            idx = np.flatnonzero((pop.pride == k) & pop.female)
            if idx.size == 0:
                continue
            genomes[idx], fit[idx], _ = hunt(genomes[idx], fit[idx], self._eval, rng)
        bits = genomes >= self.params.binarize_threshold
        reports = self.problem.evaluate_batch(bits)
        hunted = Prides(genomes, bits, reports, incumbent(pop.best, genomes, bits, reports), pop.generation,
                        pride=pop.pride.copy(), female=pop.female.copy())
        out = mate_sort_eliminate(hunted, self.params, self.problem, rng)
        out.generation = pop.generation + 1
        return out
