"""
Planning result models
Dataclasses carried between the queuing network, rebalancing, evaluation,
optimization and simulation layers. Zone-indexed arrays are 0-based
(array index = zone id - 1).
"""
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


class SolveStatus(str, Enum):
    """Outcome of a steady-state solve"""
    CONVERGED = "converged"
    UNSERVABLE = "unservable"
    NO_CONVERGENCE = "no_convergence"
    NEGATIVE_SOLUTION = "negative_solution"


@dataclass
class SuitableCounts:
    """Suitable-vehicle counts N_ii^r (K x 4, diagonal directions) and N_ij (K x K, diagonal unused)"""
    intra: np.ndarray
    inter: np.ndarray


@dataclass
class PickupRates:
    """Caller pickup rates (veh/hr) by vehicle class and caller class"""
    idle_intra: np.ndarray      # p_ii00_i, (K,)
    local_intra: np.ndarray     # p_iii0_i, (K,)
    remote_intra: np.ndarray    # p_iij0_i, [i, seeker j]
    idle_inter: np.ndarray      # p_ii00_j, [i, caller j]
    local_inter: np.ndarray     # p_iii0_j, [i, caller j]
    remote_inter: np.ndarray    # p_iik0_j, [i, caller j, seeker k]

    def assigned_idle(self) -> np.ndarray:
        """a_i000"""
        return self.idle_intra + self.idle_inter.sum(axis=1)

    def assigned_local(self) -> np.ndarray:
        """a_i0i0"""
        return self.local_intra + self.local_inter.sum(axis=1)

    def assigned_remote(self) -> np.ndarray:
        """a_i0j0, [i, seeker j]"""
        return self.remote_intra + self.remote_inter.sum(axis=1)

    def served_by_class(self) -> Dict[str, float]:
        return {
            "idle": float(self.assigned_idle().sum()),
            "seeker_local": float(self.assigned_local().sum()),
            "seeker_remote": float(self.assigned_remote().sum()),
        }


@dataclass
class CrossZoneFlows:
    """Delivery, exit and border-crossing rates (veh/hr)"""
    g_remote: np.ndarray         # g_i0j0, [i, j]
    c_remote: np.ndarray         # c_i0j0, [i, j]
    c_local: np.ndarray          # c_i0i0, (K,)
    c_local_local: np.ndarray    # c_i0ii, (K,)
    c_local_remote: np.ndarray   # c_i0ij, [i, j]
    d_local_remote: np.ndarray   # d_i0ij, [i, j]
    d_local_local: np.ndarray    # d_i0ii, (K,)
    d_local: np.ndarray          # d_i0i0, (K,)
    full_index: List[Tuple[int, int, int]]   # (i, j, k) for g_i0jk / c_i0jk
    g_full: np.ndarray
    c_full: np.ndarray


@dataclass
class DerivedCounts:
    """Vehicle counts of the states not solved for directly"""
    assigned_empty: np.ndarray        # n_ii00, (K,)
    assigned_local: np.ndarray        # n_iii0, (K,)
    assigned_remote: np.ndarray       # n_iij0, [i, j]
    full_local_local: np.ndarray      # n_i0ii, (K,)
    full_local_remote: np.ndarray     # n_i0ij, [i, j]
    full_remote_remote: np.ndarray    # n_i0jk, aligned with CrossZoneFlows.full_index
    rebalancing: np.ndarray           # n_ij00, [i, j]


@dataclass
class FlowSolution:
    """Steady state of the queuing network for one design"""
    n_idle: np.ndarray
    n_seeker_local: np.ndarray
    n_seeker_remote: np.ndarray
    counts: SuitableCounts
    pickups: PickupRates
    theta_local: np.ndarray
    theta_remote: np.ndarray
    flows: CrossZoneFlows
    rho: np.ndarray
    derived: DerivedCounts
    residual_norm: float
    iterations: int = 0

    @property
    def size(self) -> int:
        return len(self.n_idle)

    def assigned_idle(self) -> np.ndarray:
        return self.pickups.assigned_idle()

    def assigned_local(self) -> np.ndarray:
        return self.theta_local * self.n_seeker_local

    def assigned_remote(self) -> np.ndarray:
        return self.theta_remote * self.n_seeker_remote

    def seeker_vector(self) -> np.ndarray:
        """Solved unknowns x = (n_i0i0, n_i0j0)"""
        size = self.size
        off_diagonal = ~np.eye(size, dtype=bool)
        return np.concatenate([self.n_seeker_local, self.n_seeker_remote[off_diagonal]])

    def max_rate(self) -> float:
        flows = self.flows
        arrays = [
            flows.g_remote, flows.c_remote, flows.c_local, flows.c_local_local, flows.c_local_remote,
            flows.d_local_remote, flows.d_local_local, flows.d_local, flows.g_full, flows.c_full,
            self.pickups.idle_intra, self.pickups.idle_inter, self.pickups.local_inter,
        ]
        return float(max((np.max(a) if a.size else 0.0) for a in arrays))


@dataclass
class SteadyStateResult:
    """Solve outcome; infeasibility is reported as a status, not raised"""
    status: SolveStatus
    solution: Optional[FlowSolution] = None
    detail: str = ""
    attempts: int = 0
    uniqueness_gap: Optional[float] = None

    @property
    def converged(self) -> bool:
        return self.status == SolveStatus.CONVERGED


@dataclass
class RebalancePlan:
    """Idle-vehicle repositioning flows b_ij and their vehicle-hours"""
    flows: np.ndarray           # b_ij, [i, j]
    costs: np.ndarray           # hours per rebalancing trip, [i, j]
    objective: float

    @property
    def counts(self) -> np.ndarray:
        """n_ij00 by Little's law"""
        return self.flows * self.costs

    @property
    def vehicle_hours(self) -> float:
        """M_b"""
        return float(self.counts.sum())

    def nonzero_flows(self, tolerance: float = 1e-12) -> Dict[str, float]:
        size = self.flows.shape[0]
        return {
            f"{i + 1}->{j + 1}": float(self.flows[i, j])
            for i in range(size)
            for j in range(size)
            if self.flows[i, j] > tolerance
        }


@dataclass
class PerformanceReport:
    """System metrics of one evaluated design"""
    per_zone_active: np.ndarray
    rebalancing: float
    total_fleet: float
    passenger_hours: float
    agency_cost: float
    passenger_cost: float
    cost_per_pax: float
    mean_door_to_door: float
    total_demand: float

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["per_zone_active"] = [float(v) for v in self.per_zone_active]
        data["active_total"] = float(np.sum(self.per_zone_active))
        return data


@dataclass
class EvaluationOutcome:
    """Result of evaluating a design; objective is the penalty when infeasible"""
    feasible: bool
    objective: float
    status: str
    detail: str = ""
    report: Optional[PerformanceReport] = None
    solution: Optional[FlowSolution] = None
    plan: Optional[RebalancePlan] = None


@dataclass
class TraceEntry:
    """One optimizer iteration"""
    start: int
    iteration: int
    objective: float
    feasible: bool
    best_objective: float
    step: float = 0.0


@dataclass
class StartSummary:
    """Best point reached by one multistart run"""
    start: int
    best_objective: float
    feasible: bool
    iterations: int
    stop_reason: str
    evaluations: int = 0


@dataclass
class OptimResult:
    """Best design across all starts"""
    best_design: Any
    best_report: PerformanceReport
    best_solution: FlowSolution
    best_plan: RebalancePlan
    trace: List[TraceEntry] = field(default_factory=list)
    starts_summary: List[StartSummary] = field(default_factory=list)

    @property
    def best_objective(self) -> float:
        return self.best_report.cost_per_pax


@dataclass
class OracleRow:
    """Monte-Carlo estimate of one geometric constant"""
    name: str
    estimate: float
    std_error: float
    expected: float
    samples: int

    @property
    def relative_error(self) -> float:
        return abs(self.estimate - self.expected) / abs(self.expected)

    def passed(self, tolerance: float) -> bool:
        return self.relative_error <= tolerance


@dataclass
class SimMetrics:
    """Post-warmup averages of one or more simulation replications"""
    horizon: float
    warmup: float
    fleet_size: int
    state_time_averages: Dict[str, float]
    od_door_to_door: Dict[str, float]
    mean_door_to_door: float
    mean_pickup_distance: float
    passenger_hours: float
    generated: int
    served: int
    queued: int
    completed: int
    served_rate: float
    pickup_shares: Dict[str, float]
    max_queue: int
    starved: bool
    missed_rebalances: int = 0
    replications: int = 1

    @property
    def busy_vehicles(self) -> float:
        return float(sum(v for k, v in self.state_time_averages.items() if k != "IDLE"))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["busy_vehicles"] = self.busy_vehicles
        return data
