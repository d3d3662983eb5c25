"""
Vehicle States
Enumeration and O(1) indexing of every (s0, s1, s2, s3) vehicle state of the queuing network
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional

from ..exceptions import StateIndexError
from ..geometry.zone_grid import ZoneGrid


class StateKind(str, Enum):
    """State families, in enumeration order"""
    IDLE = "IDLE"
    ASSIGNED_EMPTY = "ASSIGNED_EMPTY"
    SEEKER_LOCAL = "SEEKER_LOCAL"
    SEEKER_REMOTE = "SEEKER_REMOTE"
    ASSIGNED_WITH_SEEKER_LOCAL = "ASSIGNED_WITH_SEEKER_LOCAL"
    ASSIGNED_WITH_SEEKER_REMOTE = "ASSIGNED_WITH_SEEKER_REMOTE"
    FULL_LOCAL_LOCAL = "FULL_LOCAL_LOCAL"
    FULL_LOCAL_REMOTE = "FULL_LOCAL_REMOTE"
    FULL_REMOTE_REMOTE = "FULL_REMOTE_REMOTE"
    REBALANCING = "REBALANCING"

    @property
    def passengers(self) -> int:
        """Assigned plus onboard passengers"""
        return _PASSENGERS[self]


_PASSENGERS = {
    StateKind.IDLE: 0,
    StateKind.ASSIGNED_EMPTY: 1,
    StateKind.SEEKER_LOCAL: 1,
    StateKind.SEEKER_REMOTE: 1,
    StateKind.ASSIGNED_WITH_SEEKER_LOCAL: 2,
    StateKind.ASSIGNED_WITH_SEEKER_REMOTE: 2,
    StateKind.FULL_LOCAL_LOCAL: 2,
    StateKind.FULL_LOCAL_REMOTE: 2,
    StateKind.FULL_REMOTE_REMOTE: 2,
    StateKind.REBALANCING: 0,
}

_KIND_ORDER = {kind: n for n, kind in enumerate(StateKind)}


@dataclass(frozen=True)
class VehicleState:
    """(s0, s1, s2, s3); None marks an empty slot"""
    s0: int
    s1: Optional[int] = None
    s2: Optional[int] = None
    s3: Optional[int] = None

    @property
    def kind(self) -> StateKind:
        i, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        if s2 is None:
            if s3 is not None:
                raise StateIndexError(f"state {self.name} has a farther destination without a closer one")
            if s1 is None:
                return StateKind.IDLE
            return StateKind.ASSIGNED_EMPTY if s1 == i else StateKind.REBALANCING
        if s1 is not None:
            if s1 != i:
                raise StateIndexError(f"state {self.name} is assigned a caller outside its zone")
            if s3 is not None:
                raise StateIndexError(f"state {self.name} exceeds vehicle capacity")
            return StateKind.ASSIGNED_WITH_SEEKER_LOCAL if s2 == i else StateKind.ASSIGNED_WITH_SEEKER_REMOTE
        if s3 is None:
            return StateKind.SEEKER_LOCAL if s2 == i else StateKind.SEEKER_REMOTE
        if s2 == i:
            return StateKind.FULL_LOCAL_LOCAL if s3 == i else StateKind.FULL_LOCAL_REMOTE
        if s3 == i:
            raise StateIndexError(f"state {self.name} lists the local destination as the farther one")
        return StateKind.FULL_REMOTE_REMOTE

    @property
    def name(self) -> str:
        return ":".join(str(v or 0) for v in (self.s0, self.s1, self.s2, self.s3))

    @classmethod
    def parse(cls, name: str) -> "VehicleState":
        """Inverse of ``name``"""
        try:
            parts = [int(p) for p in name.split(":")]
        except ValueError:
            raise StateIndexError(f"malformed state name {name!r}") from None
        if len(parts) != 4 or parts[0] <= 0:
            raise StateIndexError(f"malformed state name {name!r}")
        s0, s1, s2, s3 = (p if p else None for p in parts)
        return cls(s0, s1, s2, s3)

    def _sort_key(self):
        return (
            self.s0,
            _KIND_ORDER[self.kind],
            self.s1 or 0,
            self.s2 or 0,
            self.s3 or 0,
        )


class StateSpace:
    """Ordered list of the valid states of a grid with a state <-> index map"""

    def __init__(self, grid: ZoneGrid, states: List[VehicleState]):
        self.grid = grid
        self.states = states
        self._index: Dict[VehicleState, int] = {s: n for n, s in enumerate(states)}

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[VehicleState]:
        return iter(self.states)

    def __contains__(self, state: VehicleState) -> bool:
        return state in self._index

    def index_of(self, state: VehicleState) -> int:
        position = self._index.get(state)
        if position is None:
            raise StateIndexError(f"state {state.name} ({state.kind.value}) is not valid for this grid")
        return position

    def state_of(self, index: int) -> VehicleState:
        if not 0 <= index < len(self.states):
            raise StateIndexError(f"state index {index} out of range 0..{len(self.states) - 1}")
        return self.states[index]

    def states_in_zone(self, i: int) -> List[VehicleState]:
        return [s for s in self.states if s.s0 == i]

    def count_by_kind(self) -> Dict[StateKind, int]:
        counts = {kind: 0 for kind in StateKind}
        for state in self.states:
            counts[state.kind] += 1
        return counts


def enumerate_states(grid: ZoneGrid) -> StateSpace:
    """All valid vehicle states, zone-major, kind-minor, destinations ascending"""
    states: List[VehicleState] = []
    ids = grid.zone_ids
    for i in ids:
        others = [j for j in ids if j != i]
        zone_states = [
            VehicleState(i),
            VehicleState(i, i),
            VehicleState(i, None, i),
            VehicleState(i, i, i),
            VehicleState(i, None, i, i),
        ]
        for j in others:
            zone_states.append(VehicleState(i, None, j))
            zone_states.append(VehicleState(i, i, j))
            zone_states.append(VehicleState(i, None, i, j))
            zone_states.append(VehicleState(i, j))
            for k in sorted(grid.farther_feasible_dest_zones(i, j)):
                zone_states.append(VehicleState(i, None, j, k))
        states.extend(sorted(zone_states, key=VehicleState._sort_key))
    return StateSpace(grid, states)
