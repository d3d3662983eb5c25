"""
Zone Grid
Lattice partition of the study region and every zone set the queuing equations reference
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from ..exceptions import GridValidationError


class Direction(str, Enum):
    """Compass directions on the street lattice"""
    E = "E"
    NE = "NE"
    N = "N"
    NW = "NW"
    W = "W"
    SW = "SW"
    S = "S"
    SE = "SE"

    @property
    def is_cardinal(self) -> bool:
        return self in CARDINAL_DIRECTIONS

    @property
    def is_diagonal(self) -> bool:
        return self in DIAGONAL_DIRECTIONS

    @property
    def offset(self) -> Tuple[int, int]:
        """(d_col, d_row) unit step; rows grow northward"""
        return _OFFSETS[self]

    def adjacent_pair(self) -> Tuple["Direction", "Direction"]:
        """The two directions adjacent to this one (U^r)"""
        return _ADJACENT[self]

    def mirrored(self) -> "Direction":
        """Direction after a left-right reflection of the grid"""
        return _MIRROR[self]


CARDINAL_DIRECTIONS: Tuple[Direction, ...] = (Direction.E, Direction.N, Direction.W, Direction.S)
DIAGONAL_DIRECTIONS: Tuple[Direction, ...] = (Direction.NE, Direction.NW, Direction.SW, Direction.SE)

_OFFSETS = {
    Direction.E: (1, 0), Direction.NE: (1, 1), Direction.N: (0, 1), Direction.NW: (-1, 1),
    Direction.W: (-1, 0), Direction.SW: (-1, -1), Direction.S: (0, -1), Direction.SE: (1, -1),
}

_ADJACENT = {
    Direction.E: (Direction.SE, Direction.NE),
    Direction.NE: (Direction.E, Direction.N),
    Direction.N: (Direction.NE, Direction.NW),
    Direction.NW: (Direction.N, Direction.W),
    Direction.W: (Direction.NW, Direction.SW),
    Direction.SW: (Direction.W, Direction.S),
    Direction.S: (Direction.SW, Direction.SE),
    Direction.SE: (Direction.S, Direction.E),
}

_MIRROR = {
    Direction.E: Direction.W, Direction.W: Direction.E,
    Direction.NE: Direction.NW, Direction.NW: Direction.NE,
    Direction.SE: Direction.SW, Direction.SW: Direction.SE,
    Direction.N: Direction.N, Direction.S: Direction.S,
}


def _sign(value: int) -> int:
    return (value > 0) - (value < 0)


def direction_from_offset(d_col: int, d_row: int) -> Direction:
    """Direction group of a non-zero lattice displacement"""
    key = (_sign(d_col), _sign(d_row))
    for direction, offset in _OFFSETS.items():
        if offset == key:
            return direction
    raise ValueError("zero displacement has no direction")


@dataclass(frozen=True)
class Zone:
    """A square zone on the lattice"""
    id: int
    row: int
    col: int


class ZoneGrid:
    """Simply connected set of square zones with side length phi (km)"""

    def __init__(self, zones: Iterable[Zone], phi: float, validate_routes: bool = True):
        self.logger = logging.getLogger(__name__)
        self.zones: List[Zone] = sorted(zones, key=lambda z: z.id)
        self.phi = float(phi)

        self._validate_layout()

        self._by_id: Dict[int, Zone] = {z.id: z for z in self.zones}
        self._by_cell: Dict[Tuple[int, int], int] = {(z.row, z.col): z.id for z in self.zones}
        self._min_row = min(z.row for z in self.zones)
        self._min_col = min(z.col for z in self.zones)
        self._max_row = max(z.row for z in self.zones)
        self._max_col = max(z.col for z in self.zones)

        self._build_zone_sets()
        if validate_routes:
            self._validate_routes()

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @classmethod
    def from_layout(
        cls,
        rows: int,
        cols: int,
        phi: float,
        mask: Optional[Sequence[Sequence[int]]] = None,
        zone_ids: Optional[Sequence[Sequence[int]]] = None,
        validate_routes: bool = True,
    ) -> "ZoneGrid":
        """
        Build a grid from a picture of the region.

        ``mask`` and ``zone_ids`` are listed north row first, west to east.
        Without ``zone_ids`` the occupied cells are numbered in that reading order.
        """
        if rows <= 0 or cols <= 0:
            raise GridValidationError(f"grid must have positive rows and cols, got {rows}x{cols}")

        if zone_ids is not None:
            cls._check_shape(zone_ids, rows, cols, "zone_ids")
        if mask is not None:
            cls._check_shape(mask, rows, cols, "mask")

        zones: List[Zone] = []
        next_id = 1
        for picture_row in range(rows):
            row = rows - 1 - picture_row
            for col in range(cols):
                occupied = True if mask is None else bool(mask[picture_row][col])
                if zone_ids is not None:
                    zone_id = int(zone_ids[picture_row][col])
                    if zone_id == 0:
                        if mask is not None and occupied:
                            raise GridValidationError(
                                f"cell ({picture_row}, {col}) is masked in but has no zone id"
                            )
                        continue
                    if not occupied:
                        raise GridValidationError(
                            f"cell ({picture_row}, {col}) carries zone id {zone_id} but is masked out"
                        )
                    zones.append(Zone(zone_id, row, col))
                elif occupied:
                    zones.append(Zone(next_id, row, col))
                    next_id += 1

        return cls(zones, phi, validate_routes=validate_routes)

    @staticmethod
    def _check_shape(table: Sequence[Sequence[int]], rows: int, cols: int, name: str):
        if len(table) != rows or any(len(line) != cols for line in table):
            raise GridValidationError(f"{name} must be a {rows}x{cols} table")

    def _validate_layout(self):
        """Check ids, cells, phi and simple connectivity"""
        if not self.zones:
            raise GridValidationError("grid has no zones")
        if not self.phi > 0:
            raise GridValidationError(f"phi must be positive, got {self.phi}")

        ids = [z.id for z in self.zones]
        if ids != list(range(1, len(ids) + 1)):
            raise GridValidationError(f"zone ids must be 1..{len(ids)} without gaps, got {ids}")

        cells = [(z.row, z.col) for z in self.zones]
        if len(set(cells)) != len(cells):
            raise GridValidationError("two zones occupy the same lattice cell")

        occupied = set(cells)
        lattice = nx.Graph()
        lattice.add_nodes_from(occupied)
        for row, col in occupied:
            for neighbor in ((row + 1, col), (row, col + 1)):
                if neighbor in occupied:
                    lattice.add_edge((row, col), neighbor)
        if not nx.is_connected(lattice):
            raise GridValidationError("occupied cells are not connected")

        # holes: empty cells of the padded bounding box split into several 8-connected pieces
        min_row = min(r for r, _ in occupied) - 1
        max_row = max(r for r, _ in occupied) + 1
        min_col = min(c for _, c in occupied) - 1
        max_col = max(c for _, c in occupied) + 1
        background = nx.Graph()
        empty = [
            (r, c)
            for r in range(min_row, max_row + 1)
            for c in range(min_col, max_col + 1)
            if (r, c) not in occupied
        ]
        background.add_nodes_from(empty)
        empty_set = set(empty)
        for row, col in empty:
            for d_row, d_col in ((0, 1), (1, -1), (1, 0), (1, 1)):
                neighbor = (row + d_row, col + d_col)
                if neighbor in empty_set:
                    background.add_edge((row, col), neighbor)
        if nx.number_connected_components(background) > 1:
            raise GridValidationError("region has holes; only simply connected regions are supported")

    def _build_zone_sets(self):
        """Precompute A_i^r, G_i^r, V_ij, Omega_ii^r, Omega_ij and Omega~_ij"""
        ids = self.zone_ids

        self._adjacent: Dict[Tuple[int, Direction], Optional[int]] = {}
        for zone in self.zones:
            for direction in CARDINAL_DIRECTIONS:
                d_col, d_row = direction.offset
                self._adjacent[(zone.id, direction)] = self._by_cell.get((zone.row + d_row, zone.col + d_col))

        self._direction: Dict[Tuple[int, int], Direction] = {}
        self._groups: Dict[Tuple[int, Direction], FrozenSet[int]] = {}
        for i in ids:
            members: Dict[Direction, List[int]] = {d: [] for d in Direction}
            for j in ids:
                if i == j:
                    continue
                d_col, d_row = self._displacement(i, j)
                direction = direction_from_offset(d_col, d_row)
                self._direction[(i, j)] = direction
                members[direction].append(j)
            for direction, zone_list in members.items():
                self._groups[(i, direction)] = frozenset(zone_list)

        self._next: Dict[Tuple[int, int], FrozenSet[int]] = {}
        self._omega: Dict[Tuple[int, int], FrozenSet[int]] = {}
        self._omega_tilde: Dict[Tuple[int, int], FrozenSet[int]] = {}
        for i in ids:
            for j in ids:
                if i == j:
                    continue
                direction = self._direction[(i, j)]
                if direction.is_cardinal:
                    candidates = [self._adjacent[(i, direction)]]
                else:
                    candidates = [self._adjacent[(i, r)] for r in direction.adjacent_pair()]
                self._next[(i, j)] = frozenset(z for z in candidates if z is not None)

                omega = frozenset(k for k in ids if k != i and self._nested_from(i, j, k))
                self._omega[(i, j)] = omega
                distance_ij = self.lattice_distance(i, j)
                self._omega_tilde[(i, j)] = frozenset(
                    k for k in omega if self.lattice_distance(i, k) >= distance_ij
                )

        self._intra: Dict[Tuple[int, Direction], FrozenSet[int]] = {}
        for i in ids:
            for direction in DIAGONAL_DIRECTIONS:
                first, second = direction.adjacent_pair()
                self._intra[(i, direction)] = (
                    self._groups[(i, direction)] | self._groups[(i, first)] | self._groups[(i, second)]
                )

    def _validate_routes(self):
        """Every ordered pair must have at least one feasible next zone"""
        blocked = [(i, j) for (i, j), next_zones in self._next.items() if not next_zones]
        if blocked:
            i, j = blocked[0]
            raise GridValidationError(
                f"no feasible next zone from {i} toward {j} ({len(blocked)} blocked pairs); "
                "zone-level detours around concavities are not modelled"
            )

    # ------------------------------------------------------------------
    # basic lookups
    # ------------------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.zones)

    @property
    def zone_ids(self) -> List[int]:
        return [z.id for z in self.zones]

    @property
    def rows(self) -> int:
        return self._max_row - self._min_row + 1

    @property
    def cols(self) -> int:
        return self._max_col - self._min_col + 1

    def zone(self, i: int) -> Zone:
        """Zone record for an id"""
        try:
            return self._by_id[i]
        except KeyError:
            raise ValueError(f"unknown zone id {i}") from None

    def zone_at(self, row: int, col: int) -> Optional[int]:
        """Zone occupying a lattice cell, or None"""
        return self._by_cell.get((row, col))

    def _displacement(self, i: int, j: int) -> Tuple[int, int]:
        a, b = self.zone(i), self.zone(j)
        return b.col - a.col, b.row - a.row

    def lattice_distance(self, i: int, j: int) -> int:
        d_col, d_row = self._displacement(i, j)
        return abs(d_col) + abs(d_row)

    def _nested_from(self, i: int, j: int, k: int) -> bool:
        """Sign-compatible displacements whose nearer end is dominated by the farther one"""
        dj = self._displacement(i, j)
        dk = self._displacement(i, k)
        for a, b in zip(dj, dk):
            if a * b < 0:
                return False
        near, far = (dj, dk) if sum(map(abs, dj)) <= sum(map(abs, dk)) else (dk, dj)
        return all(abs(n) <= abs(f) for n, f in zip(near, far))

    # ------------------------------------------------------------------
    # zone sets
    # ------------------------------------------------------------------

    def adjacent_zone(self, i: int, r: Direction) -> Optional[int]:
        """Neighbor on the r side of zone i (A_i^r), None for the dummy zone"""
        self.zone(i)
        r = Direction(r)
        if not r.is_cardinal:
            raise ValueError(f"adjacent_zone needs a cardinal direction, got {r.value}")
        return self._adjacent[(i, r)]

    def neighbors(self, i: int) -> Dict[Direction, int]:
        """Existing cardinal neighbors of zone i"""
        self.zone(i)
        return {
            r: self._adjacent[(i, r)] for r in CARDINAL_DIRECTIONS if self._adjacent[(i, r)] is not None
        }

    def direction_of(self, i: int, j: int) -> Direction:
        """Direction group of zone j as seen from zone i"""
        self.zone(i)
        self.zone(j)
        if i == j:
            raise ValueError("a zone has no direction relative to itself")
        return self._direction[(i, j)]

    def direction_group(self, i: int, r: Direction) -> FrozenSet[int]:
        """Zones in the r direction of zone i (G_i^r)"""
        self.zone(i)
        return self._groups[(i, Direction(r))]

    def is_diagonal_pair(self, i: int, j: int) -> bool:
        return self.direction_of(i, j).is_diagonal

    def zone_distance(self, i: int, j: int) -> float:
        """Rectilinear centroid distance L_ij (km)"""
        return self.phi * self.lattice_distance(i, j)

    def feasible_next_zones(self, i: int, j: int) -> FrozenSet[int]:
        """Neighbors a vehicle in i bound for j may move into (V_ij)"""
        self._check_pair(i, j)
        return self._next[(i, j)]

    def intra_feasible_dest_zones(self, i: int, r: Direction) -> FrozenSet[int]:
        """Seeker destination zones compatible with an intra-zonal caller heading r (Omega_ii^r)"""
        self.zone(i)
        r = Direction(r)
        if not r.is_diagonal:
            raise ValueError(f"intra-zonal feasible areas are defined for diagonal directions, got {r.value}")
        return self._intra[(i, r)]

    def inter_feasible_dest_zones(self, i: int, j: int) -> FrozenSet[int]:
        """Seeker destination zones that impose no zone-level detour on an i->j caller (Omega_ij)"""
        self._check_pair(i, j)
        return self._omega[(i, j)]

    def farther_feasible_dest_zones(self, i: int, j: int) -> FrozenSet[int]:
        """Members of Omega_ij no closer to i than j (Omega~_ij)"""
        self._check_pair(i, j)
        return self._omega_tilde[(i, j)]

    def _check_pair(self, i: int, j: int):
        self.zone(i)
        self.zone(j)
        if i == j:
            raise ValueError(f"zone pair needs two distinct zones, got ({i}, {j})")

    # ------------------------------------------------------------------
    # planar coordinates
    # ------------------------------------------------------------------

    def zone_origin(self, i: int) -> Tuple[float, float]:
        """Lower-left corner of zone i in km, measured from the bounding box corner"""
        zone = self.zone(i)
        return (zone.col - self._min_col) * self.phi, (zone.row - self._min_row) * self.phi

    def bounding_box(self) -> Tuple[float, float]:
        """Width and height of the bounding box in km"""
        return self.cols * self.phi, self.rows * self.phi

    def zone_of_point(self, x: float, y: float) -> Optional[int]:
        """Zone containing a point; points on a shared edge belong to the lower-left zone"""
        width, height = self.bounding_box()
        if not (0.0 <= x <= width and 0.0 <= y <= height):
            return None
        col = max(math.ceil(x / self.phi) - 1, 0)
        row = max(math.ceil(y / self.phi) - 1, 0)
        return self.zone_at(row + self._min_row, col + self._min_col)

    # ------------------------------------------------------------------
    # derived grids
    # ------------------------------------------------------------------

    def reflected(self) -> "ZoneGrid":
        """Left-right mirror image; every zone keeps its id"""
        mirrored = [Zone(z.id, z.row, self._max_col - (z.col - self._min_col)) for z in self.zones]
        return ZoneGrid(mirrored, self.phi)

    def describe(self) -> List[List[int]]:
        """Zone-id picture, north row first, 0 for empty cells"""
        picture = []
        for row in range(self._max_row, self._min_row - 1, -1):
            picture.append([self._by_cell.get((row, col), 0) for col in range(self._min_col, self._max_col + 1)])
        return picture

    def __repr__(self) -> str:
        return f"ZoneGrid(K={self.size}, {self.rows}x{self.cols}, phi={self.phi})"
