"""
Fleet Simulator
Seeded discrete-event simulation of the zero-detour ride-sharing policy on a zone grid:
Poisson callers, nearest suitable vehicle assignment, capacity-two service with the
closer destination first, path-fraction routing between zones and Poisson rebalancing
"""
import csv
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Deque, Dict, List, Optional, Sequence, Set

import numpy as np
from joblib import Parallel, delayed

from ..config.config_manager import SimulationConfig
from ..geometry.zone_grid import DIAGONAL_DIRECTIONS, direction_from_offset
from ..models.planning_models import SimMetrics
from ..network.design import DesignVars
from ..network.states import StateKind
from ..network.topology import topology_for
from .event_engine import EventType, FutureEventList

logger = logging.getLogger(__name__)

KINDS: List[StateKind] = list(StateKind)
_CODE = {kind: n for n, kind in enumerate(KINDS)}
IDLE = _CODE[StateKind.IDLE]
SEEKER_LOCAL = _CODE[StateKind.SEEKER_LOCAL]
SEEKER_REMOTE = _CODE[StateKind.SEEKER_REMOTE]
# vehicles a new caller may be matched with
AVAILABLE = {IDLE, SEEKER_LOCAL, SEEKER_REMOTE}
_DIRECTION_INDEX = {direction: n for n, direction in enumerate(DIAGONAL_DIRECTIONS)}

WARMUP_TRIP_TIMES = 10.0


def _rectilinear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(a) - np.asarray(b)).sum(axis=-1)


def largest_remainder(weights: Sequence[float], total: int) -> np.ndarray:
    """Integer split of total in proportion to weights"""
    weights = np.asarray(weights, dtype=float)
    if total <= 0:
        return np.zeros(weights.size, dtype=int)
    if weights.sum() <= 0:
        weights = np.ones(weights.size)
    exact = total * weights / weights.sum()
    counts = np.floor(exact).astype(int)
    remainder = total - int(counts.sum())
    order = np.argsort(-(exact - counts), kind="stable")
    counts[order[:remainder]] += 1
    return counts


@dataclass
class SimConfig:
    """One simulation run; fleet is the initial idle count per zone"""
    scenario: Any
    design: DesignVars
    horizon: float = 200.0
    warmup: Optional[float] = None
    seed: int = 0
    fleet: Optional[np.ndarray] = None
    rebalancing: Optional[np.ndarray] = None
    starvation_queue: int = 50
    event_log: Optional[str] = None

    def __post_init__(self):
        if self.fleet is None:
            self.fleet = np.ceil(np.asarray(self.design.n_idle, dtype=float)).astype(int)
        self.fleet = np.asarray(self.fleet, dtype=int)
        size = self.scenario.grid.size
        if self.fleet.shape != (size,) or np.any(self.fleet < 0):
            raise ValueError(f"fleet needs {size} non-negative counts")
        if self.fleet.sum() < 1:
            raise ValueError("fleet size must be at least 1")
        if self.rebalancing is None:
            self.rebalancing = np.zeros((size, size))
        self.rebalancing = np.asarray(self.rebalancing, dtype=float)
        if self.warmup is None:
            self.warmup = min(WARMUP_TRIP_TIMES * mean_trip_time(self.scenario), 0.5 * self.horizon)
        if not self.horizon > self.warmup >= 0:
            raise ValueError(f"need horizon > warmup >= 0, got horizon {self.horizon}, warmup {self.warmup}")

    @classmethod
    def from_outcome(
        cls,
        scenario,
        design: DesignVars,
        outcome,
        settings: Optional[SimulationConfig] = None,
        **overrides,
    ) -> "SimConfig":
        """Fleet of ceil(M) placed in proportion to M_i, rebalancing at the planned rates"""
        settings = settings or SimulationConfig()
        report = outcome.report
        total = int(math.ceil(report.total_fleet - 1e-9))
        values = dict(
            scenario=scenario,
            design=design,
            horizon=settings.horizon,
            warmup=settings.warmup,
            seed=settings.seed,
            fleet=largest_remainder(report.per_zone_active, total),
            rebalancing=outcome.plan.flows,
            starvation_queue=settings.starvation_queue,
            event_log=settings.event_log,
        )
        values.update(overrides)
        return cls(**values)


def mean_trip_time(scenario) -> float:
    """Demand-weighted rectilinear trip time in hours"""
    grid = scenario.grid
    demand = np.asarray(scenario.demand, dtype=float)
    if demand.sum() <= 0:
        return grid.phi / scenario.speed
    distances = np.array(
        [[grid.zone_distance(i, j) if i != j else 2.0 * grid.phi / 3.0 for j in grid.zone_ids] for i in grid.zone_ids]
    )
    return float((demand * distances).sum() / demand.sum()) / scenario.speed


@dataclass
class Passenger:
    id: int
    origin_zone: int
    dest_zone: int
    origin: np.ndarray
    dest: np.ndarray
    requested: float
    picked_up: Optional[float] = None
    dropped_off: Optional[float] = None

    @property
    def od(self) -> str:
        return f"{self.origin_zone}->{self.dest_zone}"


@dataclass
class _Vehicle:
    """Per-vehicle bookkeeping that does not need vectorised access"""
    onboard: List[Passenger] = field(default_factory=list)
    assigned: Optional[Passenger] = None
    crossing_to: Optional[int] = None
    rebalance_to: Optional[int] = None


class _StateClock:
    """Integrates the number of vehicles per state family over the measurement window"""

    def __init__(self, warmup: float, horizon: float):
        self.warmup = warmup
        self.horizon = horizon
        self.counts = np.zeros(len(KINDS))
        self.area = np.zeros(len(KINDS))
        self.last = 0.0

    def advance(self, t: float):
        start, end = max(self.last, self.warmup), min(t, self.horizon)
        if end > start:
            self.area += self.counts * (end - start)
        self.last = max(self.last, t)

    def averages(self) -> Dict[str, float]:
        window = self.horizon - self.warmup
        return {kind.value: float(self.area[n] / window) for n, kind in enumerate(KINDS)}


class FleetSimulator:
    """One replication; run() returns the post-warmup metrics"""

    def __init__(self, config: SimConfig):
        self.config = config
        self.scenario = config.scenario
        self.grid = config.scenario.grid
        self.topology = topology_for(self.grid)
        self.speed = float(config.scenario.speed)
        self.phi = float(self.grid.phi)
        self.rng = np.random.default_rng(config.seed)
        self.events = FutureEventList()
        self.clock = _StateClock(config.warmup, config.horizon)
        self.logger = logging.getLogger(__name__)

        size = int(config.fleet.sum())
        self.size = size
        self.zone = np.zeros(size, dtype=int)
        self.kind = np.full(size, IDLE, dtype=int)
        self.start = np.zeros((size, 2))
        self.end = np.zeros((size, 2))
        self.t0 = np.zeros(size)
        self.version = np.zeros(size, dtype=int)
        self.seeker_dest = np.zeros((size, 2))
        self.seeker_zone = np.zeros(size, dtype=int)
        self.bound = np.zeros(size, dtype=int)
        self.vehicles = [_Vehicle() for _ in range(size)]
        self.available: Dict[int, Set[int]] = {z: set() for z in self.grid.zone_ids}
        self.queues: Dict[int, Deque[Passenger]] = {z: deque() for z in self.grid.zone_ids}
        self.backlog: Dict[int, Dict[int, int]] = {z: {} for z in self.grid.zone_ids}

        self.next_passenger = 0
        self.generated = 0
        self.served = 0
        self.completed = 0
        self.served_after_warmup = 0
        self.max_queue = 0
        self.missed_rebalances = 0
        self.pickup_distances: List[float] = []
        self.pickup_kinds: Dict[str, int] = {}
        self.trip_times: Dict[str, List[float]] = {}
        self.log_rows: List[Dict[str, Any]] = []

    # ------------------------------------------------------------------
    # geometry
    # ------------------------------------------------------------------

    def _random_point(self, zone: int) -> np.ndarray:
        x0, y0 = self.grid.zone_origin(zone)
        return np.array([x0, y0]) + self.phi * self.rng.random(2)

    def positions(self, idx: np.ndarray, t: float) -> np.ndarray:
        """Current points of vehicles moving x first, then y"""
        start, end = self.start[idx], self.end[idx]
        delta = end - start
        first = np.abs(delta[:, 0])
        total = first + np.abs(delta[:, 1])
        traveled = np.minimum((t - self.t0[idx]) * self.speed, total)
        on_first = traveled <= first
        x = np.where(on_first, start[:, 0] + np.sign(delta[:, 0]) * traveled, end[:, 0])
        y = np.where(on_first, start[:, 1], start[:, 1] + np.sign(delta[:, 1]) * (traveled - first))
        return np.column_stack([x, y])

    def position(self, v: int, t: float) -> np.ndarray:
        return self.positions(np.array([v]), t)[0]

    def _border_point(self, point: np.ndarray, zone: int, next_zone: int) -> np.ndarray:
        """Perpendicular projection of a point onto the edge shared with a neighbor"""
        x0, y0 = self.grid.zone_origin(zone)
        d_col, d_row = self.grid.direction_of(zone, next_zone).offset
        target = point.copy()
        if d_col:
            target[0] = x0 + (self.phi if d_col > 0 else 0.0)
        if d_row:
            target[1] = y0 + (self.phi if d_row > 0 else 0.0)
        return target

    def _next_zone(self, zone: int, bound: int) -> int:
        fractions = self.config.design.delta[(zone, bound)]
        vias = sorted(fractions)
        weights = np.clip(np.array([fractions[z] for z in vias]), 0.0, None)
        return int(vias[self.rng.choice(len(vias), p=weights / weights.sum())])

    # ------------------------------------------------------------------
    # state changes
    # ------------------------------------------------------------------

    def _set_state(self, v: int, t: float, kind: int, event: str, zone: Optional[int] = None):
        before, old_zone = self.kind[v], self.zone[v]
        self.clock.advance(t)
        self.clock.counts[before] -= 1
        self.clock.counts[kind] += 1
        self.available[old_zone].discard(v)
        self.kind[v] = kind
        if zone is not None:
            self.zone[v] = zone
        if kind in AVAILABLE:
            self.available[self.zone[v]].add(v)
        passengers = len(self.vehicles[v].onboard) + (self.vehicles[v].assigned is not None)
        assert passengers <= 2, f"vehicle {v} carries {passengers} passengers"
        if self.config.event_log:
            self.log_rows.append(
                {
                    "time": round(t, 9),
                    "event": event,
                    "vehicle": v,
                    "state_before": KINDS[before].value,
                    "state_after": KINDS[kind].value,
                    "zone": int(self.zone[v]),
                }
            )

    def _start_leg(self, v: int, t: float, target: np.ndarray):
        here = self.position(v, t)
        self.start[v] = here
        self.end[v] = target
        self.t0[v] = t
        self.version[v] += 1
        duration = float(_rectilinear(here, target)) / self.speed
        self.events.schedule(t + duration, EventType.LEG_END, vehicle=v, version=int(self.version[v]))

    def _park(self, v: int, t: float):
        here = self.position(v, t)
        self.start[v] = here
        self.end[v] = here
        self.t0[v] = t
        self.version[v] += 1

    def _head_for_border(self, v: int, t: float):
        zone = int(self.zone[v])
        next_zone = self._next_zone(zone, int(self.bound[v]))
        self._start_leg(v, t, self._border_point(self.position(v, t), zone, next_zone))
        self.vehicles[v].crossing_to = next_zone

    def _carry_seeker(self, v: int, t: float, passenger: Passenger):
        """Continue with a single onboard passenger"""
        self.seeker_dest[v] = passenger.dest
        self.seeker_zone[v] = passenger.dest_zone
        self.bound[v] = passenger.dest_zone
        if passenger.dest_zone == self.zone[v]:
            self._set_state(v, t, SEEKER_LOCAL, "seek")
            self._start_leg(v, t, passenger.dest)
        else:
            self._set_state(v, t, SEEKER_REMOTE, "seek")
            self._head_for_border(v, t)

    # ------------------------------------------------------------------
    # matching
    # ------------------------------------------------------------------

    def suitable(self, idx: np.ndarray, caller: Passenger) -> np.ndarray:
        """Vehicles among idx that may take the caller without a detour for anyone"""
        kinds = self.kind[idx]
        ok = kinds == IDLE
        local = kinds == SEEKER_LOCAL
        remote = kinds == SEEKER_REMOTE
        zone = caller.origin_zone - 1
        seeker_zones = self.seeker_zone[idx] - 1
        relative = self.seeker_dest[idx] - caller.origin

        if caller.dest_zone == caller.origin_zone:
            offset = caller.dest - caller.origin
            signs = np.where(offset >= 0, 1.0, -1.0)
            direction = direction_from_offset(int(signs[0]), int(signs[1]))
            reach = signs * offset
            seeker = signs * relative
            nested = np.all(seeker >= 0, axis=1) & (
                np.all(seeker <= reach, axis=1) | np.all(seeker >= reach, axis=1)
            )
            ok |= local & nested
            ok |= remote & self.topology.intra_mask[zone, _DIRECTION_INDEX[direction], seeker_zones]
        else:
            d_col, d_row = self.grid.direction_of(caller.origin_zone, caller.dest_zone).offset
            ahead = np.ones(idx.size, dtype=bool)
            if d_col:
                ahead &= d_col * relative[:, 0] >= 0
            if d_row:
                ahead &= d_row * relative[:, 1] >= 0
            ok |= local & ahead
            ok |= remote & self.topology.omega[zone, caller.dest_zone - 1, seeker_zones]
        return ok

    def _assign(self, v: int, caller: Passenger, t: float):
        here = self.position(v, t)
        kind = KINDS[self.kind[v]]
        if caller.requested >= self.config.warmup:
            self.pickup_distances.append(float(_rectilinear(here, caller.origin)))
            self.pickup_kinds[kind.value] = self.pickup_kinds.get(kind.value, 0) + 1
            self.served_after_warmup += 1
        self.served += 1
        self.vehicles[v].assigned = caller
        new_kind = {
            StateKind.IDLE: StateKind.ASSIGNED_EMPTY,
            StateKind.SEEKER_LOCAL: StateKind.ASSIGNED_WITH_SEEKER_LOCAL,
            StateKind.SEEKER_REMOTE: StateKind.ASSIGNED_WITH_SEEKER_REMOTE,
        }[kind]
        self._set_state(v, t, _CODE[new_kind], "assign")
        self._start_leg(v, t, caller.origin)

    def _match(self, caller: Passenger, t: float) -> bool:
        members = self.available[caller.origin_zone]
        if not members:
            return False
        idx = np.fromiter(sorted(members), dtype=int, count=len(members))
        ok = self.suitable(idx, caller)
        if not ok.any():
            return False
        candidates = idx[ok]
        distances = _rectilinear(self.positions(candidates, t), caller.origin)
        self._assign(int(candidates[int(np.argmin(distances))]), caller, t)
        return True

    def _on_available(self, v: int, t: float):
        """Offer a vehicle that just became suitable to the queued callers of its zone"""
        zone = int(self.zone[v])
        queue = self.queues[zone]
        if queue and self.kind[v] in AVAILABLE:
            for n, caller in enumerate(queue):
                if self.suitable(np.array([v]), caller)[0]:
                    del queue[n]
                    self._assign(v, caller, t)
                    return
        if self.kind[v] == IDLE:
            for target in sorted(self.backlog[zone]):
                if self.backlog[zone][target] > 0:
                    self.backlog[zone][target] -= 1
                    self._dispatch(v, target, t)
                    return

    def _dispatch(self, v: int, target: int, t: float):
        self.vehicles[v].rebalance_to = target
        self._set_state(v, t, _CODE[StateKind.REBALANCING], "rebalance")
        self._start_leg(v, t, self._random_point(target))

    # ------------------------------------------------------------------
    # event handlers
    # ------------------------------------------------------------------

    def _on_caller(self, t: float, classes: np.ndarray, probabilities: np.ndarray, rate: float):
        i, j = classes[self.rng.choice(len(classes), p=probabilities)]
        caller = Passenger(
            self.next_passenger, int(i), int(j), self._random_point(int(i)), self._random_point(int(j)), t
        )
        self.next_passenger += 1
        self.generated += 1
        if not self._match(caller, t):
            self.queues[caller.origin_zone].append(caller)
            self.max_queue = max(self.max_queue, sum(len(q) for q in self.queues.values()))
        self.events.schedule(t + self.rng.exponential(1.0 / rate), EventType.CALLER_ARRIVAL)

    def _on_rebalance(self, t: float, pairs: np.ndarray, probabilities: np.ndarray, rate: float):
        i, j = (int(z) for z in pairs[self.rng.choice(len(pairs), p=probabilities)])
        idle = sorted(v for v in self.available[i] if self.kind[v] == IDLE)
        if idle:
            self._dispatch(idle[int(self.rng.integers(len(idle)))], j, t)
        else:
            self.missed_rebalances += 1
            self.backlog[i][j] = self.backlog[i].get(j, 0) + 1
        self.events.schedule(t + self.rng.exponential(1.0 / rate), EventType.REBALANCE_DISPATCH)

    def _drop(self, passenger: Passenger, t: float):
        passenger.dropped_off = t
        self.completed += 1
        if passenger.requested >= self.config.warmup:
            self.trip_times.setdefault(passenger.od, []).append(t - passenger.requested)

    def _on_leg_end(self, v: int, t: float):
        kind = KINDS[self.kind[v]]
        vehicle = self.vehicles[v]
        self._park(v, t)

        if kind in (StateKind.ASSIGNED_EMPTY, StateKind.ASSIGNED_WITH_SEEKER_LOCAL, StateKind.ASSIGNED_WITH_SEEKER_REMOTE):
            caller = vehicle.assigned
            caller.picked_up = t
            vehicle.assigned = None
            vehicle.onboard.append(caller)
            if len(vehicle.onboard) == 1:
                self._carry_seeker(v, t, caller)
                self._on_available(v, t)
            else:
                self._start_shared_ride(v, t)
            return

        if kind == StateKind.SEEKER_LOCAL:
            self._drop(vehicle.onboard.pop(), t)
            self._set_state(v, t, IDLE, "drop_off")
            self._on_available(v, t)
            return

        if kind in (StateKind.FULL_LOCAL_LOCAL, StateKind.FULL_LOCAL_REMOTE):
            self._drop(vehicle.onboard.pop(0), t)
            self._carry_seeker(v, t, vehicle.onboard[0])
            self._on_available(v, t)
            return

        if kind in (StateKind.SEEKER_REMOTE, StateKind.FULL_REMOTE_REMOTE):
            entered = vehicle.crossing_to
            vehicle.crossing_to = None
            self._set_state(v, t, self.kind[v], "cross", zone=entered)
            if entered != self.bound[v]:
                self._head_for_border(v, t)
            elif kind == StateKind.SEEKER_REMOTE:
                self._set_state(v, t, SEEKER_LOCAL, "enter_destination")
                self._start_leg(v, t, vehicle.onboard[0].dest)
            elif all(p.dest_zone == entered for p in vehicle.onboard):
                here = self.position(v, t)
                vehicle.onboard.sort(key=lambda p: float(_rectilinear(here, p.dest)))
                self._set_state(v, t, _CODE[StateKind.FULL_LOCAL_LOCAL], "enter_destination")
                self._start_leg(v, t, vehicle.onboard[0].dest)
            else:
                self._set_state(v, t, _CODE[StateKind.FULL_LOCAL_REMOTE], "enter_destination")
                self._start_leg(v, t, vehicle.onboard[0].dest)
            self._on_available(v, t)
            return

        if kind == StateKind.REBALANCING:
            target = vehicle.rebalance_to
            vehicle.rebalance_to = None
            self._set_state(v, t, IDLE, "rebalance_end", zone=target)
            self._on_available(v, t)

    def _start_shared_ride(self, v: int, t: float):
        """Two onboard: order them closer destination first and head for it"""
        vehicle = self.vehicles[v]
        zone = int(self.zone[v])
        here = self.position(v, t)

        def closeness(p: Passenger):
            lattice = 0 if p.dest_zone == zone else self.grid.lattice_distance(zone, p.dest_zone)
            return lattice, float(_rectilinear(here, p.dest))

        vehicle.onboard.sort(key=closeness)
        closer, farther = vehicle.onboard
        local = [p.dest_zone == zone for p in vehicle.onboard]
        if all(local):
            self._set_state(v, t, _CODE[StateKind.FULL_LOCAL_LOCAL], "pick_up")
            self._start_leg(v, t, closer.dest)
        elif local[0]:
            self._set_state(v, t, _CODE[StateKind.FULL_LOCAL_REMOTE], "pick_up")
            self._start_leg(v, t, closer.dest)
        else:
            self.bound[v] = closer.dest_zone
            self._set_state(v, t, _CODE[StateKind.FULL_REMOTE_REMOTE], "pick_up")
            self._head_for_border(v, t)

    # ------------------------------------------------------------------
    # run
    # ------------------------------------------------------------------

    def _place_fleet(self):
        v = 0
        self.clock.counts[IDLE] = self.size
        for zone, count in zip(self.grid.zone_ids, self.config.fleet):
            for _ in range(int(count)):
                point = self._random_point(zone)
                self.zone[v] = zone
                self.start[v] = self.end[v] = point
                self.available[zone].add(v)
                v += 1

    def run(self) -> SimMetrics:
        config = self.config
        self._place_fleet()

        demand = np.asarray(self.scenario.demand, dtype=float)
        classes = np.argwhere(demand > 0) + 1
        caller_rate = float(demand.sum())
        caller_probabilities = demand[demand > 0] / caller_rate if caller_rate > 0 else None
        if caller_rate > 0:
            self.events.schedule(self.rng.exponential(1.0 / caller_rate), EventType.CALLER_ARRIVAL)

        flows = config.rebalancing
        pairs = np.argwhere(flows > 0) + 1
        rebalance_rate = float(flows[flows > 0].sum())
        rebalance_probabilities = flows[flows > 0] / rebalance_rate if rebalance_rate > 0 else None
        if rebalance_rate > 0:
            self.events.schedule(self.rng.exponential(1.0 / rebalance_rate), EventType.REBALANCE_DISPATCH)
        self.events.schedule(config.horizon, EventType.HORIZON)

        self.logger.info(
            f"Simulating {self.size} vehicles for {config.horizon:g} h (warmup {config.warmup:.3g} h, seed {config.seed})"
        )
        while not self.events.is_empty():
            event = self.events.next_event()
            t = event.time
            if event.type == EventType.HORIZON:
                break
            if event.type == EventType.CALLER_ARRIVAL:
                self._on_caller(t, classes, caller_probabilities, caller_rate)
            elif event.type == EventType.REBALANCE_DISPATCH:
                self._on_rebalance(t, pairs, rebalance_probabilities, rebalance_rate)
            elif event.payload["version"] == self.version[event.payload["vehicle"]]:
                self._on_leg_end(event.payload["vehicle"], t)
        self.clock.advance(config.horizon)

        if config.event_log:
            write_event_log(config.event_log, self.log_rows)
        return self._metrics()

    def _metrics(self) -> SimMetrics:
        config = self.config
        window = config.horizon - config.warmup
        averages = self.clock.averages()
        pax_hours = float(sum(KINDS[n].passengers * averages[kind.value] for n, kind in enumerate(KINDS)))
        trips = [x for values in self.trip_times.values() for x in values]
        assignments = sum(self.pickup_kinds.values())
        queued = sum(len(q) for q in self.queues.values())
        starved = self.max_queue > config.starvation_queue
        if starved:
            self.logger.warning(f"Caller queue peaked at {self.max_queue}; the fleet cannot keep up")
        assert self.generated == self.served + queued

        return SimMetrics(
            horizon=config.horizon,
            warmup=config.warmup,
            fleet_size=self.size,
            state_time_averages=averages,
            od_door_to_door={od: float(np.mean(values)) for od, values in sorted(self.trip_times.items())},
            mean_door_to_door=float(np.mean(trips)) if trips else 0.0,
            mean_pickup_distance=float(np.mean(self.pickup_distances)) if self.pickup_distances else 0.0,
            passenger_hours=pax_hours,
            generated=self.generated,
            served=self.served,
            queued=queued,
            completed=self.completed,
            served_rate=self.served_after_warmup / window,
            pickup_shares={k: n / assignments for k, n in sorted(self.pickup_kinds.items())} if assignments else {},
            max_queue=self.max_queue,
            starved=starved,
            missed_rebalances=self.missed_rebalances,
        )


def write_event_log(path: str, rows: List[Dict[str, Any]]):
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=["time", "event", "vehicle", "state_before", "state_after", "zone"])
        writer.writeheader()
        writer.writerows(rows)
    logger.info(f"Wrote {len(rows)} events to {target}")


def run_discrete_event(config: SimConfig) -> SimMetrics:
    return FleetSimulator(config).run()


def merge_metrics(runs: Sequence[SimMetrics]) -> SimMetrics:
    """Equal-window replications averaged; counts summed, queue peaks maximised"""
    first = runs[0]
    count = len(runs)

    def mean_dict(key: str) -> Dict[str, float]:
        keys = sorted({k for run in runs for k in getattr(run, key)})
        return {k: float(np.mean([getattr(run, key).get(k, 0.0) for run in runs])) for k in keys}

    return SimMetrics(
        horizon=first.horizon,
        warmup=first.warmup,
        fleet_size=first.fleet_size,
        state_time_averages=mean_dict("state_time_averages"),
        od_door_to_door={
            od: float(np.mean([run.od_door_to_door[od] for run in runs if od in run.od_door_to_door]))
            for od in sorted({od for run in runs for od in run.od_door_to_door})
        },
        mean_door_to_door=float(np.mean([run.mean_door_to_door for run in runs])),
        mean_pickup_distance=float(np.mean([run.mean_pickup_distance for run in runs])),
        passenger_hours=float(np.mean([run.passenger_hours for run in runs])),
        generated=sum(run.generated for run in runs),
        served=sum(run.served for run in runs),
        queued=sum(run.queued for run in runs),
        completed=sum(run.completed for run in runs),
        served_rate=float(np.mean([run.served_rate for run in runs])),
        pickup_shares=mean_dict("pickup_shares"),
        max_queue=max(run.max_queue for run in runs),
        starved=any(run.starved for run in runs),
        missed_rebalances=sum(run.missed_rebalances for run in runs),
        replications=count,
    )


def _replicate(config: SimConfig, seed: int, index: int) -> SimMetrics:
    values = dict(config.__dict__)
    values["seed"] = seed
    if config.event_log and index > 0:
        values["event_log"] = None
    return run_discrete_event(SimConfig(**values))


def run_replications(config: SimConfig, replications: int = 1, workers: int = 1) -> SimMetrics:
    """Seeded replications in parallel, merged into one set of metrics"""
    if replications < 1:
        raise ValueError("replications must be at least 1")
    if replications == 1:
        return run_discrete_event(config)
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(config.seed).spawn(replications)]
    runs = Parallel(n_jobs=workers)(delayed(_replicate)(config, seed, n) for n, seed in enumerate(seeds))
    return merge_metrics(runs)


def analytic_diagnostics(metrics: SimMetrics, scenario, design: DesignVars, report, tolerance: float = 0.2) -> Dict[str, Any]:
    """Simulated throughput, busy vehicles and door-to-door time against the steady-state model"""
    total_demand = float(np.sum(scenario.demand))
    busy_model = report.total_fleet - float(np.sum(design.n_idle))
    rows = {
        "served_rate": (metrics.served_rate, total_demand, 0.02),
        "busy_vehicles": (metrics.busy_vehicles, busy_model, tolerance),
        "door_to_door_hours": (metrics.mean_door_to_door, report.mean_door_to_door, tolerance),
    }
    diagnostics: Dict[str, Any] = {}
    for name, (simulated, analytic, band) in rows.items():
        gap = abs(simulated - analytic) / analytic if analytic else float("inf")
        diagnostics[name] = {
            "simulated": simulated,
            "analytic": analytic,
            "relative_gap": gap,
            "flag": "pass" if gap <= band else "warn",
        }
    return diagnostics
