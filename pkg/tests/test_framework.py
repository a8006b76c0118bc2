import numpy as np
import pytest

from coverset.antcolony import BinaryAntColony
from coverset.coverage import DimensionError
from coverset.framework import (
    TRACE_HEADER,
    ConvergenceTrace,
    InvariantError,
    Problem,
    Termination,
    make_rng,
    roulette_probabilities,
    run,
)
from coverset.genetic import AdaptiveGA
from coverset.lion import LionOptimizer
from coverset.pso import ParticleSwarm

OPTIMIZERS = [AdaptiveGA, BinaryAntColony, LionOptimizer, ParticleSwarm]


def test_rng_is_pcg64_and_repeatable():
    a, b = make_rng(5), make_rng(5)
    assert isinstance(a.bit_generator, np.random.PCG64)
    assert np.array_equal(a.random(10), b.random(10))
    g = np.random.default_rng(1)
    assert make_rng(g) is g


def test_problem_cache(problem):
    bits = np.zeros(100, dtype=bool)
    bits[:10] = True
    r1 = problem.evaluate(bits)
    n = problem.n_evals
    assert problem.evaluate(bits.copy()) is r1
    assert problem.n_evals == n
    batch = problem.evaluate_batch(np.stack([bits, ~bits, bits]))
    assert batch[0] is r1 and batch[2] is r1
    assert problem.n_evals == n + 1
    with pytest.raises(DimensionError):
        problem.evaluate(np.ones(3, bool))


@pytest.mark.parametrize("cls", OPTIMIZERS)
def test_step_is_deterministic(cls, small_problem):
    opt = cls(small_problem)
    pop = opt.initialize(make_rng(3))
    a = opt.step(pop, make_rng(11))
    b = opt.step(pop, make_rng(11))
    assert np.array_equal(a.genomes, b.genomes)
    assert a.fitness.tolist() == b.fitness.tolist()


@pytest.mark.parametrize("cls", OPTIMIZERS)
def test_step_preserves_size_and_incumbent(cls, small_problem):
    opt = cls(small_problem)
    rng = make_rng(0)
    pop = opt.initialize(rng)
    assert pop.size == 40
    for _ in range(15):
        before = pop.best.fitness
        pop = opt.step(pop, rng)
        assert pop.size == 40
        assert pop.best.fitness >= before


@pytest.mark.parametrize("cls", OPTIMIZERS)
def test_step_rejects_wrong_dimension(cls, small_problem, problem):
    pop = cls(problem).initialize(make_rng(0))
    with pytest.raises(DimensionError):
        cls(small_problem).step(pop, make_rng(0))


@pytest.mark.parametrize("cls", OPTIMIZERS)
def test_run_trace_is_reproducible(cls, small_problem):
    best_a, tr_a, _ = run(cls(small_problem), Termination(30), make_rng(8))
    best_b, tr_b, _ = run(cls(Problem(small_problem.model)), Termination(30), make_rng(8))
    assert tr_a.to_csv(timing=False) == tr_b.to_csv(timing=False)
    assert np.array_equal(best_a.bits, best_b.bits)
    assert len(tr_a) == 30 and tr_a.last.generation == 30
    combined = [r.best_combined for r in tr_a.records]
    assert combined == sorted(combined)


def test_run_best_is_highest_seen(small_problem):
    seen = []
    best, trace, _ = run(AdaptiveGA(small_problem), Termination(20), make_rng(1),
                         on_generation=lambda p: seen.append(p.fitness.max()))
    assert best.fitness >= max(seen)
    assert best.fitness == trace.last.best_combined


def test_termination_validation():
    with pytest.raises(ValueError):
        Termination(0)
    with pytest.raises(ValueError):
        Termination(2.5)


def test_target_met_by_initial_population(small_problem):
    best, trace, _ = run(AdaptiveGA(small_problem), Termination(100, target=0.0), make_rng(0))
    assert len(trace) == 1 and trace.last.generation == 1


def test_budget_of_250_generations(small_problem):
    _, trace, _ = run(ParticleSwarm(small_problem), Termination(250), make_rng(0))
    assert len(trace) <= 250 and trace.last.generation <= 250


def test_trace_rejects_regression(small_problem):
    pop = AdaptiveGA(small_problem).initialize(make_rng(0))
    members = sorted(pop.members, key=lambda c: c.fitness)
    tr = ConvergenceTrace()
    tr.append(1, members[-1], 0.0)
    with pytest.raises(InvariantError):
        tr.append(2, members[0], 1.0)
    with pytest.raises(InvariantError):
        tr.append(1, members[-1], 1.0)


def test_trace_csv_format(small_problem):
    _, trace, _ = run(AdaptiveGA(small_problem), Termination(3), make_rng(0))
    lines = trace.to_csv().splitlines()
    assert lines[0] == TRACE_HEADER == "generation,best_combined,best_f1,best_active,wallclock_ms"
    assert len(lines) == 4
    g, comb, f1, act, ms = lines[1].split(",")
    assert int(g) == 1 and float(comb) == trace.records[0].best_combined and float(ms) >= 0
    assert trace.to_csv(timing=False).splitlines()[1].endswith(",")


def test_roulette_probabilities():
    assert roulette_probabilities([1, 1, 2]).tolist() == [0.25, 0.25, 0.5]
    assert roulette_probabilities([0, 0, 0, 0]).tolist() == [0.25] * 4
    with pytest.raises(ValueError):
        roulette_probabilities([-1, 2])
