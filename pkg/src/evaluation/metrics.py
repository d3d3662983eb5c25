"""
Performance Metrics
Fleet size, passenger hours and system cost per passenger of a solved design
"""
from typing import Tuple

import numpy as np

from ..models.planning_models import FlowSolution, PerformanceReport, RebalancePlan


def _full_by_zone(solution: FlowSolution) -> np.ndarray:
    """n_i0jk summed over (j, k) for each zone i"""
    totals = np.zeros(solution.size)
    for n, (i, _, _) in enumerate(solution.flows.full_index):
        totals[i] += solution.derived.full_remote_remote[n]
    return totals


def active_by_zone(solution: FlowSolution) -> np.ndarray:
    """M_i: every non-rebalancing vehicle state located in zone i"""
    derived = solution.derived
    return (
        solution.n_idle
        + derived.assigned_empty
        + solution.n_seeker_local
        + derived.assigned_local
        + solution.n_seeker_remote.sum(axis=1)
        + derived.assigned_remote.sum(axis=1)
        + derived.full_local_local
        + derived.full_local_remote.sum(axis=1)
        + _full_by_zone(solution)
    )


def fleet_metrics(solution: FlowSolution, plan: RebalancePlan) -> Tuple[np.ndarray, float, float]:
    """(M_i per zone, M_b, M)"""
    per_zone = active_by_zone(solution)
    rebalancing = plan.vehicle_hours
    return per_zone, rebalancing, float(per_zone.sum()) + rebalancing


def passenger_hours(solution: FlowSolution) -> float:
    """P: state counts weighted by assigned plus onboard passengers"""
    derived = solution.derived
    single = (
        derived.assigned_empty.sum()
        + solution.n_seeker_local.sum()
        + solution.n_seeker_remote.sum()
    )
    double = (
        derived.assigned_local.sum()
        + derived.assigned_remote.sum()
        + derived.full_local_local.sum()
        + derived.full_local_remote.sum()
        + derived.full_remote_remote.sum()
    )
    return float(single + 2.0 * double)


def system_cost(total_fleet: float, pax_hours: float, scenario) -> float:
    """Z = (gamma M + beta P) / total demand, $/pax"""
    total_demand = scenario.total_demand
    if not total_demand > 0:
        raise ValueError("system cost per passenger needs positive total demand")
    return (scenario.vehicle_cost * total_fleet + scenario.value_of_time * pax_hours) / total_demand


def build_report(scenario, solution: FlowSolution, plan: RebalancePlan) -> PerformanceReport:
    per_zone, rebalancing, total_fleet = fleet_metrics(solution, plan)
    pax_hours = passenger_hours(solution)
    total_demand = scenario.total_demand
    return PerformanceReport(
        per_zone_active=per_zone,
        rebalancing=rebalancing,
        total_fleet=total_fleet,
        passenger_hours=pax_hours,
        agency_cost=scenario.vehicle_cost * total_fleet,
        passenger_cost=scenario.value_of_time * pax_hours,
        cost_per_pax=system_cost(total_fleet, pax_hours, scenario),
        mean_door_to_door=pax_hours / total_demand,
        total_demand=total_demand,
    )
