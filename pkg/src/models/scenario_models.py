"""
Scenario input models
Schemas for scenario, design, rebalancing and trip-record files
"""
import re
from datetime import datetime
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


DELTA_KEY_PATTERN = re.compile(r"^\s*(\d+)\s*->\s*(\d+)\s*:\s*(\d+)\s*$")


class GridSpec(BaseModel):
    """Zone layout portion of a scenario file"""
    rows: int = Field(..., gt=0, description="Lattice rows")
    cols: int = Field(..., gt=0, description="Lattice columns")
    mask: Optional[List[List[int]]] = Field(None, description="1 for occupied cells, north row first")
    zone_ids: Optional[List[List[int]]] = Field(None, description="Zone id per cell (0 = empty), north row first")

    @model_validator(mode="after")
    def check_tables(self) -> "GridSpec":
        for name in ("mask", "zone_ids"):
            table = getattr(self, name)
            if table is None:
                continue
            if len(table) != self.rows or any(len(line) != self.cols for line in table):
                raise ValueError(f"{name} must have {self.rows} rows of {self.cols} entries")
        return self


class ScenarioSpec(BaseModel):
    """Physical and economic parameters plus the OD demand matrix"""
    name: Optional[str] = Field(None, description="Scenario label used in reports")
    grid: GridSpec = Field(..., description="Zone layout")
    phi_km: float = Field(..., gt=0, description="Zone side length (km)")
    speed_kmh: float = Field(..., gt=0, description="Vehicle cruising speed (km/hr)")
    value_of_time: float = Field(..., ge=0, description="Passenger value of time ($/pax-hr)")
    vehicle_cost: Optional[float] = Field(None, ge=0, description="Vehicle operating cost ($/veh-hr)")
    demand: List[List[float]] = Field(..., description="Trip rates (trip/hr), row = origin zone")
    demand_scale: float = Field(1.0, ge=1.0, description="Common demand scaling factor q")

    @field_validator("demand")
    @classmethod
    def check_demand(cls, value: List[List[float]]) -> List[List[float]]:
        size = len(value)
        if size == 0 or any(len(row) != size for row in value):
            raise ValueError("demand must be a square matrix")
        for i, row in enumerate(value, start=1):
            for j, rate in enumerate(row, start=1):
                if rate < 0:
                    raise ValueError(f"negative trip rate at ({i}, {j}): {rate}")
        if sum(sum(row) for row in value) <= 0:
            raise ValueError("total trip rate must be positive")
        return value


class DesignSpec(BaseModel):
    """Idle deployment and path fractions chosen by the operator"""
    n_idle: List[float] = Field(..., description="Idle vehicles per zone")
    delta: Dict[str, float] = Field(default_factory=dict, description='Path fractions keyed "i->j:via"')

    @field_validator("n_idle")
    @classmethod
    def check_idle(cls, value: List[float]) -> List[float]:
        for i, count in enumerate(value, start=1):
            if count < 0:
                raise ValueError(f"negative idle count in zone {i}: {count}")
        return value

    @field_validator("delta")
    @classmethod
    def check_delta_keys(cls, value: Dict[str, float]) -> Dict[str, float]:
        for key, fraction in value.items():
            if not DELTA_KEY_PATTERN.match(key):
                raise ValueError(f'path fraction key "{key}" must look like "i->j:via"')
            if not 0.0 <= fraction <= 1.0:
                raise ValueError(f"path fraction {key} = {fraction} is outside [0, 1]")
        return value


class RhoSpec(BaseModel):
    """Net idle-vehicle creation rate per zone"""
    rho: List[float] = Field(..., min_length=1, description="rho_i (veh/hr), positive for surplus zones")


class TripRecord(BaseModel):
    """One raw trip, located by zone id or by planar coordinates (km)"""
    pickup_zone: Optional[int] = Field(None, ge=1)
    pickup_x: Optional[float] = None
    pickup_y: Optional[float] = None
    dropoff_zone: Optional[int] = Field(None, ge=1)
    dropoff_x: Optional[float] = None
    dropoff_y: Optional[float] = None
    timestamp: datetime = Field(..., description="Request time")

    @model_validator(mode="after")
    def check_location(self) -> "TripRecord":
        for end in ("pickup", "dropoff"):
            has_zone = getattr(self, f"{end}_zone") is not None
            has_point = getattr(self, f"{end}_x") is not None and getattr(self, f"{end}_y") is not None
            if not (has_zone or has_point):
                raise ValueError(f"{end} needs a zone id or both coordinates")
        return self
