"""
Scenario Loader
Validated physical/economic parameters and OD demand, loaded from JSON scenario files
"""
import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import ValidationError

from ..exceptions import GridValidationError, ScenarioLoadError
from ..geometry.zone_grid import ZoneGrid
from ..models.scenario_models import GridSpec, ScenarioSpec

logger = logging.getLogger(__name__)

DRIVER_WAGE = 40.0          # $/veh-hr
VEHICLE_COST_PER_KM = 0.48  # $/km


def default_vehicle_cost(speed: float) -> float:
    """gamma = 40 + 0.48 v"""
    return DRIVER_WAGE + VEHICLE_COST_PER_KM * speed


@dataclass(frozen=True, eq=False)
class Scenario:
    """Zone grid, speeds, costs and the (already scaled) K x K demand matrix"""
    grid: ZoneGrid
    speed: float
    value_of_time: float
    vehicle_cost: float
    demand: np.ndarray
    demand_scale: float = 1.0
    name: str = "scenario"
    grid_spec: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        demand = np.array(self.demand, dtype=float)
        demand.setflags(write=False)
        object.__setattr__(self, "demand", demand)
        size = self.grid.size
        if demand.shape != (size, size):
            raise ScenarioLoadError(f"expected a {size}x{size} matrix, got {demand.shape}", "demand")
        if np.any(demand < 0):
            raise ScenarioLoadError("trip rates must be non-negative", "demand")
        if not demand.sum() > 0:
            raise ScenarioLoadError("total trip rate must be positive", "demand")
        if not self.speed > 0:
            raise ScenarioLoadError(f"must be positive, got {self.speed}", "speed_kmh")
        if self.value_of_time < 0:
            raise ScenarioLoadError(f"must be non-negative, got {self.value_of_time}", "value_of_time")
        if self.vehicle_cost < 0:
            raise ScenarioLoadError(f"must be non-negative, got {self.vehicle_cost}", "vehicle_cost")
        if self.demand_scale < 1:
            raise ScenarioLoadError(f"must be at least 1, got {self.demand_scale}", "demand_scale")

    @property
    def size(self) -> int:
        return self.grid.size

    @property
    def phi(self) -> float:
        return self.grid.phi

    @property
    def total_demand(self) -> float:
        return float(self.demand.sum())

    @property
    def base_demand(self) -> np.ndarray:
        """Demand before the common scaling factor q"""
        return self.demand / self.demand_scale

    def with_value_of_time(self, value_of_time: float) -> "Scenario":
        return replace(self, value_of_time=value_of_time)

    def with_demand_scale(self, demand_scale: float) -> "Scenario":
        """Rescale from the base demand to a new factor q"""
        return replace(self, demand=self.base_demand * demand_scale, demand_scale=demand_scale)

    def to_dict(self) -> Dict[str, Any]:
        """Scenario-file representation (demand written unscaled with its factor)"""
        grid_spec = self.grid_spec or {
            "rows": self.grid.rows,
            "cols": self.grid.cols,
            "zone_ids": self.grid.describe(),
        }
        return {
            "name": self.name,
            "grid": grid_spec,
            "phi_km": self.phi,
            "speed_kmh": self.speed,
            "value_of_time": self.value_of_time,
            "vehicle_cost": self.vehicle_cost,
            "demand": self.base_demand.tolist(),
            "demand_scale": self.demand_scale,
        }

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, default=float)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def grid_from_spec(spec: GridSpec, phi: float) -> ZoneGrid:
    """Build and validate the zone grid described by a scenario file"""
    return ZoneGrid.from_layout(spec.rows, spec.cols, phi, mask=spec.mask, zone_ids=spec.zone_ids)


def scenario_from_spec(spec: ScenarioSpec) -> Scenario:
    """Turn a validated schema into a Scenario, applying demand_scale"""
    try:
        grid = grid_from_spec(spec.grid, spec.phi_km)
    except GridValidationError as e:
        raise ScenarioLoadError(str(e), "grid") from e

    vehicle_cost = spec.vehicle_cost
    if vehicle_cost is None:
        vehicle_cost = default_vehicle_cost(spec.speed_kmh)
        logger.debug(f"vehicle_cost omitted, using 40 + 0.48v = {vehicle_cost}")

    demand = np.asarray(spec.demand, dtype=float) * spec.demand_scale
    return Scenario(
        grid=grid,
        speed=spec.speed_kmh,
        value_of_time=spec.value_of_time,
        vehicle_cost=vehicle_cost,
        demand=demand,
        demand_scale=spec.demand_scale,
        name=spec.name or "scenario",
        grid_spec=spec.grid.model_dump(exclude_none=True),
    )


def parse_scenario(data: Dict[str, Any]) -> Scenario:
    """Validate a scenario dictionary"""
    try:
        spec = ScenarioSpec.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "scenario"
        raise ScenarioLoadError(first["msg"], location) from e
    return scenario_from_spec(spec)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Load a scenario JSON file"""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ScenarioLoadError(f"file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ScenarioLoadError(f"invalid JSON in {path}: {e}") from e

    scenario = parse_scenario(data)
    logger.info(
        f"Loaded scenario '{scenario.name}' from {path}: K={scenario.size}, "
        f"total demand {scenario.total_demand:.1f} trip/hr (q={scenario.demand_scale})"
    )
    return scenario


def save_scenario(scenario: Scenario, path: Union[str, Path]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scenario.to_dict(), f, indent=2)


def homogeneous_scenario(
    grid: ZoneGrid,
    total_rate: float,
    speed: float = 25.0,
    value_of_time: float = 20.0,
    vehicle_cost: Optional[float] = None,
    name: str = "homogeneous",
) -> Scenario:
    """Every OD pair gets total_rate / K^2"""
    if not total_rate > 0:
        raise ValueError(f"total_rate must be positive, got {total_rate}")
    size = grid.size
    demand = np.full((size, size), total_rate / size ** 2)
    return Scenario(
        grid=grid,
        speed=speed,
        value_of_time=value_of_time,
        vehicle_cost=default_vehicle_cost(speed) if vehicle_cost is None else vehicle_cost,
        demand=demand,
        name=name,
    )
