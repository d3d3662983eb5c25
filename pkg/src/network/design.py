"""
Design Variables
Idle-vehicle deployment and zone-level path fractions, with the free-coordinate
parameterisation used by the optimizer and the design-file codec
"""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ..exceptions import DesignValidationError
from ..geometry.zone_grid import ZoneGrid
from ..models.scenario_models import DELTA_KEY_PATTERN, DesignSpec

logger = logging.getLogger(__name__)

FRACTION_TOLERANCE = 1e-9

Pair = Tuple[int, int]


@dataclass
class DesignVars:
    """n_i000 per zone and delta_{ij_i'} per (i, j != i, next zone i'); zone ids are 1-based"""
    n_idle: np.ndarray
    delta: Dict[Pair, Dict[int, float]] = field(default_factory=dict)

    def __post_init__(self):
        self.n_idle = np.asarray(self.n_idle, dtype=float)

    @classmethod
    def uniform(cls, grid: ZoneGrid, n_idle: Union[float, Sequence[float]]) -> "DesignVars":
        """Split every pair evenly over its feasible next zones"""
        if np.isscalar(n_idle):
            n_idle = np.full(grid.size, float(n_idle))
        delta: Dict[Pair, Dict[int, float]] = {}
        for i in grid.zone_ids:
            for j in grid.zone_ids:
                if i == j:
                    continue
                next_zones = sorted(grid.feasible_next_zones(i, j))
                delta[(i, j)] = {z: 1.0 / len(next_zones) for z in next_zones}
        return cls(np.asarray(n_idle, dtype=float), delta)

    def fraction(self, i: int, j: int, via: int) -> float:
        return self.delta.get((i, j), {}).get(via, 0.0)

    def validate(self, grid: ZoneGrid):
        """Bounds and path-fraction constraints; errors name the offending pair"""
        if self.n_idle.shape != (grid.size,):
            raise DesignValidationError(f"n_idle needs {grid.size} entries, got {self.n_idle.shape}")
        if np.any(self.n_idle < 0) or not np.all(np.isfinite(self.n_idle)):
            zone = int(np.argmax((self.n_idle < 0) | ~np.isfinite(self.n_idle))) + 1
            raise DesignValidationError(f"idle count in zone {zone} must be finite and non-negative")
        for i in grid.zone_ids:
            for j in grid.zone_ids:
                if i == j:
                    continue
                label = f"{i}->{j}"
                fractions = self.delta.get((i, j))
                if not fractions:
                    raise DesignValidationError("no path fractions given", label)
                allowed = grid.feasible_next_zones(i, j)
                for via, value in fractions.items():
                    if via not in allowed:
                        raise DesignValidationError(
                            f"zone {via} is not a feasible next zone (allowed {sorted(allowed)})", label
                        )
                    if not -FRACTION_TOLERANCE <= value <= 1 + FRACTION_TOLERANCE:
                        raise DesignValidationError(f"fraction via {via} = {value} is outside [0, 1]", label)
                total = sum(fractions.values())
                if abs(total - 1.0) > FRACTION_TOLERANCE:
                    raise DesignValidationError(f"fractions sum to {total:.6g}, expected 1", label)

    def to_spec(self, grid: ZoneGrid) -> Dict[str, object]:
        """Design-file dictionary listing every pair with a choice of next zone"""
        delta = {}
        for (i, j), fractions in sorted(self.delta.items()):
            if len(grid.feasible_next_zones(i, j)) < 2:
                continue
            for via, value in sorted(fractions.items()):
                delta[f"{i}->{j}:{via}"] = float(value)
        return {"n_idle": [float(v) for v in self.n_idle], "delta": delta}

    def as_vector(self) -> np.ndarray:
        """Idle counts followed by every path fraction in pair order"""
        fractions = [
            value
            for pair in sorted(self.delta)
            for _, value in sorted(self.delta[pair].items())
        ]
        return np.concatenate([self.n_idle, np.asarray(fractions, dtype=float)])

    def digest(self) -> str:
        """Exact fingerprint of the design"""
        hasher = hashlib.sha1(np.ascontiguousarray(self.n_idle).tobytes())
        for pair in sorted(self.delta):
            for via, value in sorted(self.delta[pair].items()):
                hasher.update(np.array([pair[0], pair[1], via, value], dtype=float).tobytes())
        return hasher.hexdigest()


def design_from_spec(spec: DesignSpec, grid: ZoneGrid) -> DesignVars:
    """Fill unspecified pairs with an even split, then validate"""
    if len(spec.n_idle) != grid.size:
        raise DesignValidationError(f"n_idle needs {grid.size} entries, got {len(spec.n_idle)}")
    design = DesignVars.uniform(grid, spec.n_idle)

    given: Dict[Pair, Dict[int, float]] = {}
    for key, value in spec.delta.items():
        i, j, via = (int(v) for v in DELTA_KEY_PATTERN.match(key).groups())
        if i == j or i not in grid.zone_ids or j not in grid.zone_ids:
            raise DesignValidationError("pair does not name two distinct zones", f"{i}->{j}")
        given.setdefault((i, j), {})[via] = value
    for pair, fractions in given.items():
        design.delta[pair] = fractions

    design.validate(grid)
    return design


def parse_design(data: Dict[str, object], grid: ZoneGrid) -> DesignVars:
    try:
        spec = DesignSpec.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise DesignValidationError(f"{'.'.join(str(p) for p in first['loc'])}: {first['msg']}") from e
    return design_from_spec(spec, grid)


def load_design(path: Union[str, Path], grid: ZoneGrid) -> DesignVars:
    """Read a design JSON file"""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise DesignValidationError(f"file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise DesignValidationError(f"invalid JSON in {path}: {e}") from e
    design = parse_design(data, grid)
    logger.info(f"Loaded design from {path}: total idle {design.n_idle.sum():.2f}")
    return design


def save_design(design: DesignVars, grid: ZoneGrid, path: Union[str, Path]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(design.to_spec(grid), f, indent=2)


class DesignParameterization:
    """
    Maps designs to the optimizer's free coordinates: one scalar per pair whose
    vehicles can choose between two next zones (the share sent to the first,
    in U^r order), followed by the K idle counts.
    """

    def __init__(self, grid: ZoneGrid):
        self.grid = grid
        self.free_pairs: List[Tuple[Pair, int, int]] = []
        for i in grid.zone_ids:
            for j in grid.zone_ids:
                if i == j:
                    continue
                direction = grid.direction_of(i, j)
                if not direction.is_diagonal:
                    continue
                first_side, second_side = direction.adjacent_pair()
                first = grid.adjacent_zone(i, first_side)
                second = grid.adjacent_zone(i, second_side)
                if first is not None and second is not None:
                    self.free_pairs.append(((i, j), first, second))

    @property
    def route_dimension(self) -> int:
        return len(self.free_pairs)

    @property
    def dimension(self) -> int:
        return self.route_dimension + self.grid.size

    def to_vector(self, design: DesignVars) -> np.ndarray:
        shares = [design.fraction(i, j, first) for (i, j), first, _ in self.free_pairs]
        return np.concatenate([np.asarray(shares, dtype=float), design.n_idle])

    def from_vector(self, vector: np.ndarray, template: Optional[DesignVars] = None) -> DesignVars:
        vector = np.asarray(vector, dtype=float)
        base = template or DesignVars.uniform(self.grid, 0.0)
        delta = {pair: dict(fractions) for pair, fractions in base.delta.items()}
        for n, ((i, j), first, second) in enumerate(self.free_pairs):
            share = float(np.clip(vector[n], 0.0, 1.0))
            delta[(i, j)] = {first: share, second: 1.0 - share}
        n_idle = np.maximum(vector[self.route_dimension:], 0.0)
        return DesignVars(n_idle.copy(), delta)

    def bounds(self, idle_upper: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        lower = np.zeros(self.dimension)
        upper = np.concatenate([np.ones(self.route_dimension), np.asarray(idle_upper, dtype=float)])
        return lower, upper

    def labels(self) -> List[str]:
        routes = [f"delta {i}->{j}:{first}" for (i, j), first, _ in self.free_pairs]
        return routes + [f"n_idle {i}" for i in self.grid.zone_ids]
