"""
Steady-State Equations
Assignment intensities, the cross-zone linear block, conservation residuals and
Little's-law state counts for one design
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sprs
from scipy.sparse.linalg import spsolve, splu

from ..exceptions import SolverError
from ..models.planning_models import CrossZoneFlows, DerivedCounts, PickupRates, SuitableCounts
from ..rebalancing.transportation import rebalancing_cost_matrix
from .design import DesignVars
from .matching import DIRECTION_SHARE, INTRA_SEEKER_SHARE, inverse_counts, pickup_rates, suitable_counts
from .topology import NetworkTopology, topology_for

logger = logging.getLogger(__name__)

# Expected travel distances in units of phi
NEAREST_VEHICLE = 0.63           # nearest of N suitable vehicles, scaled by 1/sqrt(N)
BOUNDARY_TO_CLOSER_OF_TWO = 5.0 / 8.0
BOUNDARY_TO_INTERIOR = 5.0 / 6.0
INTERIOR_TO_INTERIOR = 2.0 / 3.0
NESTED_LEG = 0.5
INTERIOR_TO_BOUNDARY = 0.5
ZONE_CROSSING = 1.0


def per_vehicle_intensities(scenario, counts: SuitableCounts) -> Tuple[np.ndarray, np.ndarray]:
    """
    Assignment intensities a/n of seeker vehicles with n cancelled.

    Returns (theta_local, theta_remote) where theta_local[i] = a_i0i0 / n_i0i0
    and theta_remote[i, j] = a_i0j0 / n_i0j0 (1/hr).
    """
    topology = topology_for(scenario.grid)
    demand = scenario.demand
    inv_intra, inv_inter = inverse_counts(demand, counts)
    per_direction = DIRECTION_SHARE * np.diag(demand)

    theta_local = (
        per_direction * INTRA_SEEKER_SHARE * inv_intra.sum(axis=1)
        + (demand * topology.share * inv_inter).sum(axis=1)
    )
    # seeker j serves caller k whenever j lies in Omega_ik
    theta_remote = per_direction[:, None] * np.einsum("irj,ir->ij", topology.intra_mask, inv_intra)
    theta_remote = theta_remote + np.einsum("ik,ikj->ij", demand * inv_inter, topology.omega)
    theta_remote[~topology.off_diagonal] = 0.0
    return theta_local, theta_remote


class RoutingOperator:
    """Sparse maps from exit rates g to border inflows c, weighted by the path fractions"""

    def __init__(self, topology: NetworkTopology, design: DesignVars):
        self.topology = topology
        size = topology.size
        pairs = topology.pairs()
        pair_position = topology.pair_positions()
        full_position = topology.full_position
        self.pair_count = len(pairs)
        self.full_count = len(topology.full_index)

        rem_rows, rem_cols, rem_vals = [], [], []
        arrive_rows, arrive_cols, arrive_vals = [], [], []
        for col, (source, dest) in enumerate(pairs):
            for via, share in design.delta.get((source + 1, dest + 1), {}).items():
                target = via - 1
                if share == 0.0:
                    continue
                if target == dest:
                    arrive_rows.append(dest)
                    arrive_cols.append(col)
                    arrive_vals.append(share)
                else:
                    rem_rows.append(pair_position[(target, dest)])
                    rem_cols.append(col)
                    rem_vals.append(share)

        full_rows, full_cols, full_vals = [], [], []
        lr_rows, lr_cols, lr_vals = [], [], []
        ll_rows, ll_cols, ll_vals = [], [], []
        for col, (source, closer, farther) in enumerate(topology.full_index):
            for via, share in design.delta.get((source + 1, closer + 1), {}).items():
                target = via - 1
                if share == 0.0:
                    continue
                if target != closer:
                    row = full_position.get((target, closer, farther))
                    if row is None:
                        raise SolverError(
                            f"state {target + 1}:0:{closer + 1}:{farther + 1} reached from "
                            f"{source + 1}:0:{closer + 1}:{farther + 1} is outside the state space"
                        )
                    full_rows.append(row)
                    full_cols.append(col)
                    full_vals.append(share)
                elif farther == closer:
                    ll_rows.append(closer)
                    ll_cols.append(col)
                    ll_vals.append(share)
                else:
                    lr_rows.append(pair_position[(closer, farther)])
                    lr_cols.append(col)
                    lr_vals.append(share)

        P, F = self.pair_count, self.full_count
        self.remote = sprs.csr_matrix((rem_vals, (rem_rows, rem_cols)), shape=(P, P))
        self.remote_arrivals = sprs.csr_matrix((arrive_vals, (arrive_rows, arrive_cols)), shape=(size, P))
        self.full = sprs.csr_matrix((full_vals, (full_rows, full_cols)), shape=(F, F))
        self.full_to_local_remote = sprs.csr_matrix((lr_vals, (lr_rows, lr_cols)), shape=(P, F))
        self.full_to_local_local = sprs.csr_matrix((ll_vals, (ll_rows, ll_cols)), shape=(size, F))

        # the full-state block does not depend on the unknowns; factorise once per design
        self._full_lu = None
        if F:
            system = (sprs.identity(F, format="csc") - self.full.tocsc()).tocsc()
            try:
                self._full_lu = splu(system)
            except RuntimeError as e:
                raise SolverError(f"singular two-passenger routing system: {e}") from e

        self._full_closer = np.array([t[1] for t in topology.full_index], dtype=int)
        self._full_farther = np.array([t[2] for t in topology.full_index], dtype=int)
        self._full_source = np.array([t[0] for t in topology.full_index], dtype=int)

    def full_state_pickups(self, pickups: PickupRates) -> np.ndarray:
        """p_iij0_k + I(k != j) p_iik0_j for every (i, j, k) two-passenger state"""
        if not self.full_count:
            return np.zeros(0)
        i, j, k = self._full_source, self._full_closer, self._full_farther
        caller_farther = pickups.remote_inter[i, k, j]
        caller_closer = np.where(k != j, pickups.remote_inter[i, j, k], 0.0)
        return caller_farther + caller_closer

    def solve_full(self, inflow: np.ndarray) -> np.ndarray:
        if not self.full_count:
            return np.zeros(0)
        return self._full_lu.solve(inflow)


def solve_cross_zone_linear(
    scenario,
    routing: RoutingOperator,
    pickups: PickupRates,
    theta_local: np.ndarray,
    theta_remote: np.ndarray,
) -> CrossZoneFlows:
    """Exit, border and delivery rates given pickups and intensities"""
    topology = routing.topology
    size = topology.size
    off_diagonal = topology.off_diagonal
    travel = scenario.phi / scenario.speed

    full_pickups = routing.full_state_pickups(pickups)
    g_full = routing.solve_full(full_pickups)
    c_full = routing.full @ g_full if routing.full_count else np.zeros(0)

    c_local_remote = np.zeros((size, size))
    c_local_local = np.zeros(size)
    if routing.full_count:
        c_local_remote[off_diagonal] = routing.full_to_local_remote @ g_full
        c_local_local = routing.full_to_local_local @ g_full

    d_local_remote = c_local_remote + pickups.local_inter + pickups.remote_intra
    d_local_remote[~off_diagonal] = 0.0

    g_remote = np.zeros((size, size))
    c_remote = np.zeros((size, size))
    c_local = np.zeros(size)
    if routing.pair_count:
        stay = np.exp(-theta_remote[off_diagonal] * travel)
        leave_half = np.exp(-theta_remote[off_diagonal] * travel / 2.0)
        inflow = leave_half * (pickups.idle_inter[off_diagonal] + d_local_remote[off_diagonal])
        system = sprs.identity(routing.pair_count, format="csc") - sprs.diags(stay) @ routing.remote
        try:
            g_flat = spsolve(system.tocsc(), inflow)
        except RuntimeError as e:
            raise SolverError(f"singular seeker routing system: {e}") from e
        g_flat = np.atleast_1d(g_flat)
        g_remote[off_diagonal] = g_flat
        c_remote[off_diagonal] = routing.remote @ g_flat
        c_local = routing.remote_arrivals @ g_flat

    d_local_local = pickups.local_intra + c_local_local
    d_local = (
        c_local * np.exp(-theta_local * BOUNDARY_TO_INTERIOR * travel)
        + (pickups.idle_intra + c_local_local) * np.exp(-theta_local * INTERIOR_TO_INTERIOR * travel)
        + pickups.local_intra * np.exp(-theta_local * NESTED_LEG * travel)
    )

    return CrossZoneFlows(
        g_remote=g_remote,
        c_remote=c_remote,
        c_local=c_local,
        c_local_local=c_local_local,
        c_local_remote=c_local_remote,
        d_local_remote=d_local_remote,
        d_local_local=d_local_local,
        d_local=d_local,
        full_index=topology.full_index,
        g_full=g_full,
        c_full=c_full,
    )


def _mean_occupancy(theta: np.ndarray, duration: float) -> np.ndarray:
    """(1 - exp(-theta t)) / theta: expected time in state when leaving at rate theta or after t"""
    z = theta * duration
    safe = np.where(z > 1e-12, z, 1.0)
    return duration * np.where(z > 1e-12, -np.expm1(-safe) / safe, 1.0 - z / 2.0)


@dataclass
class SystemState:
    """Everything computed from one seeker-count vector"""
    n_seeker_local: np.ndarray
    n_seeker_remote: np.ndarray
    counts: SuitableCounts
    pickups: PickupRates
    theta_local: np.ndarray
    theta_remote: np.ndarray
    flows: CrossZoneFlows


class EquationSystem:
    """Reduced steady-state system in the K^2 seeker counts for one design"""

    def __init__(self, scenario, design: DesignVars):
        self.scenario = scenario
        self.design = design
        self.topology = topology_for(scenario.grid)
        self.routing = RoutingOperator(self.topology, design)
        self.travel = scenario.phi / scenario.speed

    @property
    def dimension(self) -> int:
        return self.topology.size ** 2

    def state(self, x: np.ndarray) -> SystemState:
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        local, remote = self.topology.unpack(x)
        counts = suitable_counts(self.scenario.grid, self.design.n_idle, local, remote)
        pickups = pickup_rates(self.scenario, counts, self.design.n_idle, local, remote)
        theta_local, theta_remote = per_vehicle_intensities(self.scenario, counts)
        flows = solve_cross_zone_linear(self.scenario, self.routing, pickups, theta_local, theta_remote)
        return SystemState(local, remote, counts, pickups, theta_local, theta_remote, flows)

    def flow_residual(self, state: SystemState) -> np.ndarray:
        """In-flow minus out-flow of the seeker states (veh/hr)"""
        flows, pickups = state.flows, state.pickups
        local = (
            state.theta_local * state.n_seeker_local
            + flows.d_local
            - flows.c_local
            - flows.d_local_local
            - pickups.idle_intra
        )
        remote = (
            flows.g_remote
            + state.theta_remote * state.n_seeker_remote
            - pickups.idle_inter
            - flows.c_remote
            - flows.d_local_remote
        )
        return self.topology.pack(local, remote)

    def count_residual(self, state: SystemState) -> np.ndarray:
        """
        Same balance divided by the assignment intensity: count minus inflow times
        mean occupancy (veh). Well defined where a state receives no assignments.
        """
        flows, pickups = state.flows, state.pickups
        travel = self.travel
        theta = state.theta_local
        local = state.n_seeker_local - (
            flows.c_local * _mean_occupancy(theta, BOUNDARY_TO_INTERIOR * travel)
            + (pickups.idle_intra + flows.c_local_local) * _mean_occupancy(theta, INTERIOR_TO_INTERIOR * travel)
            + pickups.local_intra * _mean_occupancy(theta, NESTED_LEG * travel)
        )
        theta = state.theta_remote
        remote = state.n_seeker_remote - (
            flows.c_remote * _mean_occupancy(theta, ZONE_CROSSING * travel)
            + (pickups.idle_inter + flows.d_local_remote) * _mean_occupancy(theta, INTERIOR_TO_BOUNDARY * travel)
        )
        return self.topology.pack(local, remote)

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self.flow_residual(self.state(x))

    def net_rebalancing(self, state: SystemState) -> np.ndarray:
        """rho_i = d_i0i0 - a_i000"""
        return state.flows.d_local - state.pickups.assigned_idle()


def residual(scenario, design: DesignVars, x: np.ndarray) -> np.ndarray:
    """Seeker-state conservation residuals at x (length K^2)"""
    return EquationSystem(scenario, design).residual(x)


def little_law_counts(
    scenario,
    state: SystemState,
    n_idle: np.ndarray,
    routing: RoutingOperator,
    rebalancing_flows: Optional[np.ndarray] = None,
) -> DerivedCounts:
    """Counts of the remaining states from their rates and mean durations"""
    topology = topology_for(scenario.grid)
    demand = scenario.demand
    travel = scenario.phi / scenario.speed
    pickup_scale = NEAREST_VEHICLE * travel
    counts, pickups, flows = state.counts, state.pickups, state.flows

    intra_demand = np.diag(demand)
    intra_mask = (counts.intra > 0) & (intra_demand[:, None] > 0)
    inv15_intra = np.power(counts.intra, -1.5, where=intra_mask, out=np.zeros_like(counts.intra, dtype=float))
    inter_mask = (counts.inter > 0) & (demand > 0) & topology.off_diagonal
    inv15_inter = np.power(counts.inter, -1.5, where=inter_mask, out=np.zeros_like(counts.inter, dtype=float))

    per_direction = DIRECTION_SHARE * intra_demand
    inter_term = demand * inv15_inter

    assigned_empty = pickup_scale * np.asarray(n_idle, dtype=float) * (
        (per_direction[:, None] * inv15_intra).sum(axis=1) + inter_term.sum(axis=1)
    )
    assigned_local = pickup_scale * state.n_seeker_local / 2.0 * (
        (intra_demand[:, None] / 9.0 * inv15_intra).sum(axis=1)
        + (np.where(topology.diagonal_pair, 0.5, 1.0) * inter_term).sum(axis=1)
    )
    assigned_remote = pickup_scale * state.n_seeker_remote * (
        per_direction[:, None] * np.einsum("irj,ir->ij", topology.intra_mask, inv15_intra)
        + np.einsum("ik,ijk->ij", inter_term, topology.omega)
    )
    assigned_remote[~topology.off_diagonal] = 0.0

    full_local_local = (
        flows.c_local_local * BOUNDARY_TO_CLOSER_OF_TWO * travel
        + pickups.local_intra * NESTED_LEG * travel
    )
    full_local_remote = (
        flows.c_local_remote * BOUNDARY_TO_INTERIOR * travel
        + (pickups.local_inter + pickups.remote_intra) * INTERIOR_TO_INTERIOR * travel
    )
    full_local_remote[~topology.off_diagonal] = 0.0
    full_remote_remote = (
        flows.c_full * ZONE_CROSSING * travel
        + routing.full_state_pickups(pickups) * INTERIOR_TO_BOUNDARY * travel
    )

    if rebalancing_flows is None:
        rebalancing = np.zeros_like(demand)
    else:
        rebalancing = np.asarray(rebalancing_flows, dtype=float) * rebalancing_cost_matrix(
            scenario.grid, scenario.speed
        )

    return DerivedCounts(
        assigned_empty=assigned_empty,
        assigned_local=assigned_local,
        assigned_remote=assigned_remote,
        full_local_local=full_local_local,
        full_local_remote=full_local_remote,
        full_remote_remote=full_remote_remote,
        rebalancing=rebalancing,
    )
