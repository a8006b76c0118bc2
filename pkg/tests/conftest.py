import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coverset.coverage import CoverageModel, MonitoringGrid, random_deployment
from coverset.framework import Problem


@pytest.fixture
def grid():
    return MonitoringGrid()


@pytest.fixture
def small_grid():
    return MonitoringGrid(20.0, 20.0, 20, 20)


@pytest.fixture(scope="session")
def field_model():
    """Table-3 sized problem: 100 sensors, r = 10, 100 x 100 m, 1 m cells."""
    g = MonitoringGrid()
    d = random_deployment(100, g, 7)
    return CoverageModel(d, g)


@pytest.fixture
def problem(field_model):
    return Problem(field_model)


@pytest.fixture
def small_problem():
    g = MonitoringGrid(40.0, 40.0, 40, 40)
    d = random_deployment(20, g, 3, radius=6.0)
    return Problem(CoverageModel(d, g))
