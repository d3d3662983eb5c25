"""
Shared fixtures for planner tests
"""
import pytest

from src.geometry.zone_grid import ZoneGrid
from src.scenario.catalog import builtin_design, builtin_scenario


# Irregular 16-zone region, north row first
IRREGULAR_LAYOUT = [
    [0, 15, 16, 0],
    [11, 12, 13, 14],
    [7, 8, 9, 10],
    [4, 5, 6, 0],
    [1, 2, 3, 0],
]


@pytest.fixture
def grid_2x2():
    """Four square zones of 5 km: 1=NW, 2=NE, 3=SW, 4=SE"""
    return ZoneGrid.from_layout(2, 2, 5.0)


@pytest.fixture
def grid_1x2():
    """Two zones side by side"""
    return ZoneGrid.from_layout(1, 2, 1.0)


@pytest.fixture
def irregular_grid():
    """16 zones with unit side on a 5x4 lattice"""
    return ZoneGrid.from_layout(5, 4, 1.0, zone_ids=IRREGULAR_LAYOUT)


@pytest.fixture
def s1_scenario():
    return builtin_scenario("s1")


@pytest.fixture
def benchmark_scenario():
    return builtin_scenario("benchmark")


@pytest.fixture
def s1_design(s1_scenario):
    return builtin_design("s1", s1_scenario.grid)


@pytest.fixture
def benchmark_design(benchmark_scenario):
    return builtin_design("benchmark", benchmark_scenario.grid)
