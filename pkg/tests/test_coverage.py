import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coverset.coverage import (
    CoverageModel,
    Deployment,
    DimensionError,
    MonitoringGrid,
    Sensor,
    as_control_vector,
    combined_fitness,
    covered_area,
    evaluate,
    find_coverage_holes,
    is_covered,
    load_deployment,
    random_deployment,
    save_deployment,
    to_ascii,
    to_pgm,
)
from oracles import SINGLE_SENSOR_CELLS, components_bfs, covered_cell_count, covered_cells

CENTER = Deployment((Sensor(50, 50),), 10.0)


def test_is_covered_examples():
    s = Sensor(50, 50)
    assert is_covered(50, 55, s, 10)
    assert not is_covered(50, 61, s, 10)
    assert is_covered(50, 60, s, 10)  # boundary counts


def test_is_covered_is_euclidean():
    # the hyperbolic reading (x^2 - y^2 <= r^2) would accept this point
    assert not is_covered(50, 70, Sensor(50, 50), 10)


def test_grid_geometry(grid):
    assert grid.cell_dx * grid.cells_x == grid.width
    assert grid.cell_area == 1.0
    assert grid.cell_center(0, 0) == (0.5, 0.5)
    g = MonitoringGrid(30, 10, 6, 4)
    assert (g.cell_dx, g.cell_dy) == (5.0, 2.5)


@pytest.mark.parametrize("kw", [dict(width=0), dict(height=-1), dict(cells_x=0), dict(cells_y=1.5)])
def test_grid_rejects_bad_dimensions(kw):
    with pytest.raises(ValueError):
        MonitoringGrid(**kw)


def test_deployment_invariants():
    with pytest.raises(ValueError):
        Deployment((), 10)
    with pytest.raises(ValueError):
        Deployment((Sensor(1, 1),), 0)


def test_single_sensor_matches_frozen_oracle(grid):
    assert covered_cell_count([(50, 50)], 10, [1], 100, 100, 100, 100) == SINGLE_SENSOR_CELLS
    assert covered_area(CENTER, [1], grid) == SINGLE_SENSOR_CELLS * 1.0
    assert abs(SINGLE_SENSOR_CELLS - np.pi * 100) < 5


def test_all_off_covers_nothing(grid):
    d = random_deployment(30, grid, 1)
    assert covered_area(d, np.zeros(30), grid) == 0.0


def test_dense_tiling_caps_at_area():
    g = MonitoringGrid(10, 10, 10, 10)
    sensors = tuple(Sensor(x, y) for x in range(0, 11, 2) for y in range(0, 11, 2))
    d = Deployment(sensors, 5.0)
    a = covered_area(d, np.ones(d.n), g)
    assert a == g.area


def test_dimension_mismatch(grid):
    with pytest.raises(DimensionError):
        covered_area(CENTER, [1, 0], grid)
    with pytest.raises(DimensionError):
        evaluate(CENTER, [], grid)
    with pytest.raises(DimensionError):
        find_coverage_holes(CENTER, [1, 1], grid)


def test_evaluate_examples(grid):
    d = random_deployment(100, grid, 5)
    none = evaluate(d, np.zeros(100), grid)
    assert (none.f1, none.f2, none.combined, none.active_count) == (0.0, 0.0, 0.0, 0)
    full = evaluate(d, np.ones(100), grid)
    assert full.f2 == 1.0
    assert full.combined == pytest.approx(full.f1**2)


def test_combined_fitness_on_reported_row():
    # 99.1 % coverage with 42 of 100 nodes; exact value 982081/420000
    assert combined_fitness(0.991, 0.42, 42) == pytest.approx(982081 / 420000, rel=1e-12)
    assert combined_fitness(0.991, 0.42, 42) == pytest.approx(2.3383, abs=1e-4)


def test_max_objective_mode(grid):
    d = random_deployment(10, grid, 2)
    rep = evaluate(d, np.zeros(10), grid, objective="max")
    assert rep.combined == 1.0  # degenerate: 1 - f2 with nothing on
    with pytest.raises(ValueError):
        evaluate(d, np.zeros(10), grid, objective="sum")


def test_report_invariants(grid):
    d = random_deployment(50, grid, 11)
    bits = np.random.default_rng(0).random(50) < 0.4
    r = evaluate(d, bits, grid)
    assert r.f1 == r.covered_area / grid.area
    assert r.f2 == r.active_count / 50
    assert r.combined == r.f1**2 / r.f2


def test_control_vector_parsing():
    assert as_control_vector("0110").tolist() == [False, True, True, False]
    with pytest.raises(ValueError):
        as_control_vector("01x")
    with pytest.raises(ValueError):
        as_control_vector([0, 2])
    with pytest.raises(DimensionError):
        as_control_vector("01", 3)


def test_batch_matches_single(field_model):
    rng = np.random.default_rng(4)
    genomes = rng.random((16, 100)) < 0.5
    batch = field_model.evaluate_many(genomes)
    assert batch == [field_model.evaluate(g) for g in genomes]


def test_random_deployment_repeatable(grid):
    a = random_deployment(100, grid, 42)
    b = random_deployment(100, grid, 42)
    assert a == b
    assert a != random_deployment(100, grid, 43)
    xy = a.coords
    assert xy.min() >= 0 and xy[:, 0].max() <= grid.width and xy[:, 1].max() <= grid.height
    one = random_deployment(1, grid, 0)
    assert one.n == 1
    one.check_inside(grid)
    with pytest.raises(ValueError):
        random_deployment(0, grid, 0)


def test_holes_all_off_single_component(grid):
    d = random_deployment(10, grid, 0)
    h = find_coverage_holes(d, np.zeros(10), grid)
    assert len(h.uncovered_cells) == grid.n_cells
    assert h.n_holes == 1


def test_holes_full_coverage():
    g = MonitoringGrid(10, 10, 10, 10)
    d = Deployment((Sensor(5, 5),), 8.0)
    h = find_coverage_holes(d, [1], g)
    assert h.uncovered_cells == frozenset() and h.components == ()


def test_holes_single_sensor_complement(grid):
    h = find_coverage_holes(CENTER, [1], grid)
    covered = covered_cells([(50, 50)], 10, [1], 100, 100, 100, 100)
    everything = {(i, j) for i in range(100) for j in range(100)}
    assert h.uncovered_cells == everything - covered
    assert h.n_holes == 1


def test_holes_components_match_bfs(small_grid):
    d = random_deployment(8, small_grid, 9, radius=3.0)
    bits = np.ones(8, dtype=bool)
    h = find_coverage_holes(d, bits, small_grid)
    assert sorted(h.components) == sorted(components_bfs(h.uncovered_cells))


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(1, 12),
    radius=st.floats(0.5, 8.0),
    cells=st.integers(1, 20),
)
def test_oracle_equivalence_property(seed, n, radius, cells):
    g = MonitoringGrid(20.0, 20.0, cells, cells)
    d = random_deployment(n, g, seed, radius=radius)
    bits = np.random.default_rng(seed).random(n) < 0.6
    count = covered_cell_count([(s.x, s.y) for s in d.sensors], d.radius, bits, 20.0, 20.0, cells, cells)
    assert covered_area(d, bits, g) == count * g.cell_area


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), j=st.integers(0, 29))
def test_flipping_a_bit_on_never_shrinks_coverage(seed, j):
    g = MonitoringGrid(40, 40, 40, 40)
    m = CoverageModel(random_deployment(30, g, seed, radius=5.0), g)
    bits = np.random.default_rng(seed).random(30) < 0.5
    bits[j] = False
    before = m.evaluate(bits)
    bits[j] = True
    after = m.evaluate(bits)
    assert after.covered_area >= before.covered_area
    assert 0 <= after.f1 <= 1 and 0 <= after.f2 <= 1


def test_evaluate_is_pure(field_model):
    bits = np.random.default_rng(1).random(100) < 0.5
    assert field_model.evaluate(bits) == field_model.evaluate(bits.copy())


def test_deployment_json_roundtrip(tmp_path, grid):
    d = random_deployment(5, grid, 3)
    path = tmp_path / "dep.json"
    save_deployment(d, path)
    data = json.loads(path.read_text())
    assert set(data) == {"radius", "sensors"} and len(data["sensors"]) == 5
    assert load_deployment(path) == d
    with pytest.raises(ValueError):
        Deployment.from_dict({"sensors": [[1, 2]]})


def test_pgm_and_ascii_rendering():
    covered = np.zeros((3, 2), dtype=bool)  # 3 cells in x, 2 in y
    covered[0, 1] = True  # top-left once y is flipped
    pgm = to_pgm(covered)
    assert pgm.splitlines()[:3] == ["P2", "3 2", "255"]
    assert pgm.splitlines()[3:] == ["255 0 0", "0 0 0"]
    assert to_ascii(covered) == "#..\n...\n"
