"""The building blocks, one small worked case each.

Adaptive GA probabilities, the ant transition rule and pheromone update,
lion hunting moves with midpoint draws, and one particle velocity step.
"""

import numpy as np

from coverset.antcolony import AcoParams, PheromoneTable, transition_probability, update_pheromones
from coverset.genetic import (
    adaptive_crossover_prob,
    adaptive_mutation_prob,
    raw_crossover_prob,
    raw_mutation_prob,
    single_point,
)
from coverset.lion import MidpointRng, encircle_center, encircle_wing, prey_escape
from coverset.pso import PsoParams, update_position, update_velocity


def main():
    print("adaptive GA, f_max = 2, f_avg = 1")
    for f in (0.5, 1.5, 2.0):
        print(f"  f = {f}: Pc raw {raw_crossover_prob(f, 2, 1):.3f} -> {adaptive_crossover_prob(f, 2, 1):.3f}, "
              f"Pm raw {raw_mutation_prob(f, 2, 1):.3f} -> {adaptive_mutation_prob(f, 2, 1):.3f}")
    a, b = single_point([0, 0, 0, 0, 1, 1], [1, 1, 1, 1, 0, 0], 3)
    print("  000011 x 111100, cut after 3 ->", "".join(map(str, a.astype(int))), "".join(map(str, b.astype(int))))

    print("\nant colony")
    print("  tau (1, 3), eta 1: p =", transition_probability(1, 3, 1, 1, 1, 6))
    print("  tau 1, eta (1, 2), beta 6: p1 = %.4f" % transition_probability(1, 1, 1, 2, 1, 6)[1])
    ph = update_pheromones(PheromoneTable(np.ones((2, 4)), 0.01, 10), [1, 0, 1, 1], 0.1, AcoParams(rho=0.7))
    print("  after one update (rho 0.7, deposit 0.1):\n", ph.tau)

    print("\nlion hunt with midpoint draws")
    rng = MidpointRng()
    print("  wing   hunter 0.3, prey 0.5 ->", encircle_wing([0.3], [0.5], rng))
    print("  center hunter 0.8, prey 0.6 ->", encircle_center([0.8], [0.6], rng))
    print("  prey 0.8 fleeing hunter 0.2 with PI 0.5 ->", prey_escape([0.8], [0.2], 0.5, rng))

    print("\nparticle swarm")
    v = update_velocity([0.1, -0.4], [0.5, 0.5], [0.9, 0.5], [0.2, 0.7], PsoParams(), np.random.default_rng(0))
    print("  v' =", v, " x' =", update_position([0.5, 0.5], v))


if __name__ == "__main__":
    main()
