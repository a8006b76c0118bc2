"""Grid coverage geometry and the coverage/node-use fitness.

The monitoring area is split into ``cells_x * cells_y`` equal cells and the
center of every cell is a target point. A target point is covered when it
lies inside the sensing disk of at least one active sensor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

__all__ = [
    "DimensionError",
    "MonitoringGrid",
    "Sensor",
    "Deployment",
    "FitnessReport",
    "HoleReport",
    "CoverageModel",
    "is_covered",
    "as_control_vector",
    "covered_area",
    "evaluate",
    "combined_fitness",
    "find_coverage_holes",
    "random_deployment",
    "load_deployment",
    "save_deployment",
    "to_pgm",
    "to_ascii",
]

OBJECTIVES = ("ratio", "max")


class DimensionError(ValueError):
    """Raised when a control vector does not match the deployment size."""


@dataclass(frozen=True)
class MonitoringGrid:
    width: float = 100.0
    height: float = 100.0
    cells_x: int = 100
    cells_y: int = 100

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"area dimensions must be positive, got {self.width}x{self.height}")
        if int(self.cells_x) != self.cells_x or int(self.cells_y) != self.cells_y:
            raise ValueError("cell counts must be integers")
        if self.cells_x < 1 or self.cells_y < 1:
            raise ValueError(f"need at least one cell per axis, got {self.cells_x}x{self.cells_y}")
        object.__setattr__(self, "cells_x", int(self.cells_x))
        object.__setattr__(self, "cells_y", int(self.cells_y))

    @property
    def cell_dx(self) -> float:
        return self.width / self.cells_x

    @property
    def cell_dy(self) -> float:
        return self.height / self.cells_y

    @property
    def cell_area(self) -> float:
        return self.cell_dx * self.cell_dy

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def n_cells(self) -> int:
        return self.cells_x * self.cells_y

    @property
    def shape(self) -> tuple[int, int]:
        return (self.cells_x, self.cells_y)

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        return ((i + 0.5) * self.cell_dx, (j + 0.5) * self.cell_dy)

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (x, y) cell-center arrays in row-major ``(i, j)`` order."""
        cx = (np.arange(self.cells_x) + 0.5) * self.cell_dx
        cy = (np.arange(self.cells_y) + 0.5) * self.cell_dy
        X, Y = np.meshgrid(cx, cy, indexing="ij")
        return X.ravel(), Y.ravel()


@dataclass(frozen=True)
class Sensor:
    x: float
    y: float


@dataclass(frozen=True)
class Deployment:
    sensors: tuple[Sensor, ...]
    radius: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "sensors", tuple(Sensor(float(s.x), float(s.y)) for s in self.sensors))
        if len(self.sensors) < 1:
            raise ValueError("a deployment needs at least one sensor")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    @property
    def n(self) -> int:
        return len(self.sensors)

    @property
    def coords(self) -> np.ndarray:
        return np.array([[s.x, s.y] for s in self.sensors], dtype=float)

    def check_inside(self, grid: MonitoringGrid) -> None:
        xy = self.coords
        if np.any(xy < 0) or np.any(xy[:, 0] > grid.width) or np.any(xy[:, 1] > grid.height):
            raise ValueError("sensor placed outside the monitoring area")

    def to_dict(self) -> dict:
        return {"radius": self.radius, "sensors": [[s.x, s.y] for s in self.sensors]}

    @classmethod
    def from_dict(cls, data: dict) -> "Deployment":
        try:
            sensors = [Sensor(float(x), float(y)) for x, y in data["sensors"]]
            return cls(tuple(sensors), float(data["radius"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed deployment document: {exc}") from exc


@dataclass(frozen=True)
class FitnessReport:
    covered_area: float
    f1: float
    f2: float
    combined: float
    active_count: int


@dataclass(frozen=True)
class HoleReport:
    uncovered_cells: frozenset
    components: tuple

    @property
    def n_holes(self) -> int:
        return len(self.components)


def is_covered(px: float, py: float, s: Sensor, r: float) -> bool:
    """Disk membership with the boundary counted as covered."""
    dx = px - s.x
    dy = py - s.y
    return dx * dx + dy * dy <= r * r


def as_control_vector(bits, n: int | None = None) -> np.ndarray:
    """Coerce ``bits`` (sequence, array or '0101' string) to a bool vector."""
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise ValueError(f"control vector string may only contain 0/1, got {bits!r}")
        arr = np.frombuffer(bits.encode(), dtype=np.uint8) == ord("1")
    else:
        arr = np.asarray(bits)
        if arr.ndim != 1:
            raise DimensionError(f"control vector must be 1-D, got shape {arr.shape}")
        if arr.dtype != bool:
            if arr.size and not np.all((arr == 0) | (arr == 1)):
                raise ValueError("control vector entries must be 0 or 1")
            arr = arr.astype(bool)
    if n is not None and arr.shape[0] != n:
        raise DimensionError(f"control vector has length {arr.shape[0]}, deployment has {n} sensors")
    return arr


def bits_to_str(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits, dtype=bool))


def combined_fitness(f1: float, f2: float, active_count: int, objective: str = "ratio") -> float:
    """Scalarize coverage rate ``f1`` and node-use rate ``f2``.

    ``"ratio"`` is f1**2 / f2 (0 for an empty network); ``"max"`` is
    max(f1, 1 - f2).
    """
    if objective == "ratio":
        return 0.0 if active_count == 0 else f1 * f1 / f2
    if objective == "max":
        return max(f1, 1.0 - f2)
    raise ValueError(f"unknown objective {objective!r}, expected one of {OBJECTIVES}")


class CoverageModel:
    """Precomputed sensor-by-cell incidence for fast repeated evaluation.

    Row ``i`` of :attr:`incidence` marks the cells whose centers lie inside
    the disk of sensor ``i``. All evaluations are pure, so results may be
    cached by the caller.
    """

    def __init__(self, deployment: Deployment, grid: MonitoringGrid, objective: str = "ratio"):
        if objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {objective!r}, expected one of {OBJECTIVES}")
        self.deployment = deployment
        self.grid = grid
        self.objective = objective
        px, py = grid.centers()
        xy = deployment.coords
        dx = px[None, :] - xy[:, 0:1]
        dy = py[None, :] - xy[:, 1:2]
        r = deployment.radius
        self.incidence = dx * dx + dy * dy <= r * r
        self.incidence.setflags(write=False)
        self._weights = self.incidence.astype(np.float32)

    @property
    def n(self) -> int:
        return self.deployment.n

    def covered_mask(self, bits) -> np.ndarray:
        cv = as_control_vector(bits, self.n)
        return self.incidence[cv].any(axis=0)

    def covered_counts(self, genomes: np.ndarray) -> np.ndarray:
        """Covered-cell counts for a (P, N) batch of control vectors."""
        genomes = np.asarray(genomes, dtype=bool)
        if genomes.ndim != 2 or genomes.shape[1] != self.n:
            raise DimensionError(f"expected a (P, {self.n}) batch, got shape {genomes.shape}")
        # float32 sums of at most N ones are exact
        hits = genomes.astype(np.float32) @ self._weights
        return np.count_nonzero(hits > 0.5, axis=1)

    def report(self, covered_cells: int, active_count: int) -> FitnessReport:
        g = self.grid
        area = covered_cells * g.cell_area
        f1 = area / g.area
        f2 = active_count / self.n
        return FitnessReport(area, f1, f2, combined_fitness(f1, f2, active_count, self.objective), int(active_count))

    def evaluate(self, bits) -> FitnessReport:
        cv = as_control_vector(bits, self.n)
        return self.report(int(np.count_nonzero(self.incidence[cv].any(axis=0))), int(cv.sum()))

    def evaluate_many(self, genomes: np.ndarray) -> list[FitnessReport]:
        genomes = np.asarray(genomes, dtype=bool)
        counts = self.covered_counts(genomes)
        active = genomes.sum(axis=1)
        return [self.report(int(c), int(a)) for c, a in zip(counts, active)]


def covered_area(d: Deployment, cv, g: MonitoringGrid) -> float:
    return CoverageModel(d, g).evaluate(cv).covered_area


def evaluate(d: Deployment, cv, g: MonitoringGrid, objective: str = "ratio") -> FitnessReport:
    return CoverageModel(d, g, objective).evaluate(cv)


def find_coverage_holes(d: Deployment, cv, g: MonitoringGrid) -> HoleReport:
    """Uncovered cells and their 4-connected components.

    Components are ordered by their smallest cell index; each component is a
    sorted tuple of ``(i, j)`` pairs.
    """
    covered = CoverageModel(d, g).covered_mask(cv).reshape(g.shape)
    holes = ~covered
    labels, n = ndimage.label(holes)  # default structure is the 4-neighborhood
    uncovered = frozenset(zip(*(idx.tolist() for idx in np.nonzero(holes))))
    components = []
    for k in range(1, n + 1):
        ii, jj = np.nonzero(labels == k)
        components.append(tuple(sorted(zip(ii.tolist(), jj.tolist()))))
    components.sort(key=lambda c: c[0])
    return HoleReport(uncovered, tuple(components))


def random_deployment(n: int, g: MonitoringGrid, seed=None, radius: float = 10.0) -> Deployment:
    """``n`` sensors placed uniformly over the area.

    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    if n < 1:
        raise ValueError(f"need at least one sensor, got n={n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    xs = rng.uniform(0.0, g.width, n)
    ys = rng.uniform(0.0, g.height, n)
    return Deployment(tuple(Sensor(float(x), float(y)) for x, y in zip(xs, ys)), radius)


def load_deployment(path) -> Deployment:
    with open(path) as fh:
        return Deployment.from_dict(json.load(fh))


def save_deployment(d: Deployment, path) -> None:
    Path(path).write_text(json.dumps(d.to_dict(), indent=1) + "\n")


def to_pgm(covered: np.ndarray) -> str:
    """Plain (P2) PGM text: one pixel per cell, 255 covered and 0 hole.

    ``covered`` is indexed ``[i, j]`` (x, y); rows of the image run over y
    from the top of the area down, so the picture has the usual orientation.
    """
    img = np.asarray(covered, dtype=bool).T[::-1]
    h, w = img.shape
    rows = [" ".join("255" if v else "0" for v in row) for row in img]
    return f"P2\n{w} {h}\n255\n" + "\n".join(rows) + "\n"


def to_ascii(covered: np.ndarray) -> str:
    img = np.asarray(covered, dtype=bool).T[::-1]
    return "\n".join("".join("#" if v else "." for v in row) for row in img) + "\n"
