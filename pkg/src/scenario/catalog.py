"""
Built-in Scenarios
Reference scenarios and designs for the four-zone demand study, the homogeneous
benchmark and a nine-zone downtown region
"""
from typing import Dict, List, Optional

import numpy as np

from ..geometry.zone_grid import ZoneGrid
from ..network.design import DesignVars, parse_design
from .loader import Scenario, default_vehicle_cost, parse_scenario

SPEED = 25.0
VALUE_OF_TIME = 20.0

# incoming trip rate per destination zone, identical for every origin
_FOUR_ZONE_PROFILES: Dict[str, List[float]] = {
    "s1": [200.0, 200.0, 1400.0, 200.0],
    "s2": [200.0, 600.0, 1000.0, 200.0],
    "s3": [200.0, 800.0, 800.0, 200.0],
}

# hourly morning-peak trip rates, row = origin; 9520 trips/hr in total
_DOWNTOWN_DEMAND = [
    [10, 15, 150, 4, 30, 30, 8, 6, 20],
    [15, 30, 260, 6, 40, 40, 6, 10, 30],
    [25, 40, 1400, 10, 250, 300, 20, 30, 200],
    [4, 4, 36, 2, 6, 6, 2, 2, 6],
    [20, 30, 1500, 12, 250, 250, 14, 25, 120],
    [20, 25, 1600, 10, 180, 300, 16, 30, 150],
    [8, 6, 100, 4, 14, 14, 10, 7, 10],
    [6, 10, 250, 6, 30, 30, 6, 20, 24],
    [12, 20, 900, 10, 100, 130, 8, 20, 160],
]

_DESIGNS: Dict[str, Dict[str, object]] = {
    "s1": {
        "n_idle": [6, 9, 32, 6],
        "delta": {
            "2->3:1": 0.54, "2->3:4": 0.46,
            "3->2:1": 0.5, "3->2:4": 0.5,
            "1->4:2": 1.0, "1->4:3": 0.0,
            "4->1:2": 1.0, "4->1:3": 0.0,
        },
    },
    "s2": {
        "n_idle": [4, 51, 51, 4],
        "delta": {
            "2->3:1": 0.5, "2->3:4": 0.5,
            "3->2:1": 0.5, "3->2:4": 0.5,
            "1->4:2": 1.0, "1->4:3": 0.0,
            "4->1:2": 1.0, "4->1:3": 0.0,
        },
    },
    "s3": {
        "n_idle": [3, 59, 59, 3],
        "delta": {
            "2->3:1": 0.5, "2->3:4": 0.5,
            "3->2:1": 0.5, "3->2:4": 0.5,
            "1->4:2": 1.0, "1->4:3": 0.0,
            "4->1:2": 1.0, "4->1:3": 0.0,
        },
    },
    "benchmark": {
        "n_idle": [0.11, 0.11, 0.11, 0.11],
        "delta": {
            "1->4:2": 0.26, "1->4:3": 0.74,
            "4->1:2": 0.44, "4->1:3": 0.56,
            "2->3:1": 0.48, "2->3:4": 0.52,
            "3->2:1": 0.49, "3->2:4": 0.51,
        },
    },
}


def _four_zone(name: str, demand: np.ndarray) -> Dict[str, object]:
    return {
        "name": name,
        "grid": {"rows": 2, "cols": 2},
        "phi_km": 5.0,
        "speed_kmh": SPEED,
        "value_of_time": VALUE_OF_TIME,
        "vehicle_cost": default_vehicle_cost(SPEED),
        "demand": np.asarray(demand, dtype=float).tolist(),
    }


def builtin_scenario_data(name: str) -> Dict[str, object]:
    """Scenario-file dictionary of a built-in scenario"""
    key = name.lower()
    if key in _FOUR_ZONE_PROFILES:
        profile = np.asarray(_FOUR_ZONE_PROFILES[key])
        return _four_zone(key, np.tile(profile, (4, 1)))
    if key == "benchmark":
        return _four_zone(key, np.full((4, 4), 500.0))
    if key == "chicago3x3":
        return {
            "name": key,
            "grid": {"rows": 3, "cols": 3},
            "phi_km": 4.0,
            "speed_kmh": SPEED,
            "value_of_time": VALUE_OF_TIME,
            "vehicle_cost": default_vehicle_cost(SPEED),
            "demand": [[float(v) for v in row] for row in _DOWNTOWN_DEMAND],
        }
    raise KeyError(f"unknown scenario '{name}'; choose from {', '.join(builtin_scenario_names())}")


def builtin_scenario_names() -> List[str]:
    return sorted(_FOUR_ZONE_PROFILES) + ["benchmark", "chicago3x3"]


def builtin_scenario(name: str) -> Scenario:
    return parse_scenario(builtin_scenario_data(name))


def builtin_design_names() -> List[str]:
    return sorted(_DESIGNS)


def builtin_design_data(name: str) -> Dict[str, object]:
    key = name.lower()
    if key not in _DESIGNS:
        raise KeyError(f"unknown design '{name}'; choose from {', '.join(builtin_design_names())}")
    data = _DESIGNS[key]
    return {"n_idle": list(data["n_idle"]), "delta": dict(data["delta"])}


def builtin_design(name: str, grid: Optional[ZoneGrid] = None) -> DesignVars:
    """Reported design of a four-zone scenario, or the homogeneous benchmark design"""
    if grid is None:
        grid = builtin_scenario("benchmark").grid
    return parse_design(builtin_design_data(name), grid)
