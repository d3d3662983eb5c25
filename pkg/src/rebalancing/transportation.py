"""
Rebalancing Transportation Problem
Minimum vehicle-hour routing of idle vehicles from zones that create them to
zones that consume them, over the complete zone digraph
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from ..config.config_manager import RebalanceConfig
from ..exceptions import BalanceError, SolverError
from ..geometry.zone_grid import ZoneGrid
from ..models.planning_models import RebalancePlan

logger = logging.getLogger(__name__)

# extra distance of a rebalancing trip between aligned zones, in units of phi
ALIGNED_DETOUR = 1.0 / 3.0


def rebalancing_cost(grid: ZoneGrid, i: int, j: int, speed: float) -> float:
    """Hours per rebalancing trip from zone i to zone j"""
    if i == j:
        raise ValueError(f"rebalancing cost needs two distinct zones, got {i} twice")
    distance = grid.zone_distance(i, j)
    if not grid.is_diagonal_pair(i, j):
        distance += ALIGNED_DETOUR * grid.phi
    return distance / speed


def rebalancing_cost_matrix(grid: ZoneGrid, speed: float) -> np.ndarray:
    """[i, j] hours per trip, zero on the diagonal"""
    size = grid.size
    costs = np.zeros((size, size))
    for i in grid.zone_ids:
        for j in grid.zone_ids:
            if i != j:
                costs[i - 1, j - 1] = rebalancing_cost(grid, i, j, speed)
    return costs


def _edges(size: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(size) for j in range(size) if i != j]


def _balance_matrix(size: int, edges: List[Tuple[int, int]]) -> np.ndarray:
    """Net outflow of each zone per unit of edge flow"""
    A = np.zeros((size, len(edges)))
    for e, (i, j) in enumerate(edges):
        A[i, e] += 1.0
        A[j, e] -= 1.0
    return A


def _net_opposing_flows(flows: np.ndarray, tolerance: float) -> int:
    """Cancel b_ij against b_ji; returns the number of pairs touched"""
    touched = 0
    size = flows.shape[0]
    for i in range(size):
        for j in range(i + 1, size):
            common = min(flows[i, j], flows[j, i])
            if common > tolerance:
                flows[i, j] -= common
                flows[j, i] -= common
                touched += 1
    return touched


def solve_transportation(
    grid: ZoneGrid,
    rho: np.ndarray,
    speed: float,
    config: Optional[RebalanceConfig] = None,
) -> RebalancePlan:
    """
    Flows b_ij >= 0 with sum_j b_ij - sum_j b_ji = rho_i at minimum total
    sum b_ij * cost_ij. Among optimal plans the one with the smallest
    index-weighted flow is returned so repeated solves agree exactly.
    """
    config = config or RebalanceConfig()
    size = grid.size
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (size,):
        raise BalanceError(f"expected {size} net rates, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise BalanceError("net rebalancing rates must be finite")

    costs = rebalancing_cost_matrix(grid, speed)
    magnitude = float(np.abs(rho).sum())
    drift = float(rho.sum())
    if abs(drift) > config.balance_tolerance * max(magnitude, 1e-300) and magnitude > 0:
        raise BalanceError(
            f"net rates sum to {drift:.6g} against total magnitude {magnitude:.6g}; supply and demand must balance"
        )
    if magnitude == 0.0:
        return RebalancePlan(flows=np.zeros((size, size)), costs=costs, objective=0.0)

    rho = rho - drift / size
    edges = _edges(size)
    edge_costs = np.array([costs[i, j] for i, j in edges])
    # the rows sum to zero; the last one is implied by the others
    A_eq = _balance_matrix(size, edges)[:-1]
    b_eq = rho[:-1]

    result = linprog(edge_costs, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if result.status != 0:
        raise SolverError(f"transportation problem failed: {result.message}")
    x = result.x

    if config.tie_break and len(edges) > 1:
        optimum = float(result.fun)
        weights = np.arange(len(edges), 0, -1, dtype=float)
        slack = 1e-10 * max(abs(optimum), magnitude * float(edge_costs.max()))
        tie = linprog(
            weights,
            A_ub=edge_costs[None, :],
            b_ub=[optimum + slack],
            A_eq=A_eq,
            b_eq=b_eq,
            bounds=(0, None),
            method="highs",
        )
        if tie.status == 0:
            x = tie.x
        else:
            logger.debug(f"Tie-break pass skipped: {tie.message}")

    flows = np.zeros((size, size))
    floor = 1e-12 * magnitude
    for e, (i, j) in enumerate(edges):
        flows[i, j] = x[e] if x[e] > floor else 0.0

    touched = _net_opposing_flows(flows, config.netting_tolerance * magnitude)
    if touched:
        logger.warning(f"Netted {touched} opposing rebalancing flow pair(s)")
    opposing = np.argwhere((flows > floor) & (flows.T > floor))
    if opposing.size:
        i, j = (int(z) + 1 for z in opposing[0])
        raise BalanceError(f"opposing rebalancing flows remain between zones {i} and {j}")

    objective = float((flows * costs).sum())
    logger.debug(f"Rebalancing plan: {int((flows > 0).sum())} flows, {objective:.4f} veh-hr/hr")
    return RebalancePlan(flows=flows, costs=costs, objective=objective)
