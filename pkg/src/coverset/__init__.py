"""Sensor-coverage optimization for wireless sensor networks.

Binary activation vectors over a fixed random deployment are scored by grid
coverage and node use, and searched with adaptive GA, binary ant colony,
their combination, lion optimization and binary PSO.
"""

from .coverage import (
    Deployment,
    DimensionError,
    FitnessReport,
    HoleReport,
    MonitoringGrid,
    Sensor,
    CoverageModel,
    covered_area,
    evaluate,
    find_coverage_holes,
    is_covered,
    random_deployment,
)
from .framework import ConvergenceTrace, InvariantError, Population, Problem, Termination, make_rng, run

__version__ = "0.1.0"
