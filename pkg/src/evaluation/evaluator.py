"""
Design Evaluator
Steady-state solve, rebalancing plan and metrics for one design, with infeasible
designs reported as a penalised outcome instead of an exception
"""
import logging
from dataclasses import replace
from typing import Any, Dict, Optional

from ..config.config_manager import RebalanceConfig, SolverConfig
from ..exceptions import BalanceError, SolverError
from ..infrastructure.caching.cache_manager import CacheManager, CacheType
from ..models.planning_models import EvaluationOutcome
from ..network.design import DesignVars
from ..network.solver import check_conservation, solve_steady_state
from ..rebalancing.transportation import solve_transportation
from .metrics import build_report

logger = logging.getLogger(__name__)

DEFAULT_PENALTY = 1e4


def evaluate_design(
    scenario,
    design: DesignVars,
    cache: Optional[CacheManager] = None,
    solver_config: Optional[SolverConfig] = None,
    rebalance_config: Optional[RebalanceConfig] = None,
    penalty: float = DEFAULT_PENALTY,
    probe_uniqueness: Optional[bool] = None,
) -> EvaluationOutcome:
    """Z and the performance report of a design, or the penalty when it is infeasible"""
    solver_config = solver_config or SolverConfig()
    key = None
    if cache is not None:
        key = CacheManager.create_design_key(scenario.digest(), design.digest())
        cached = cache.get(key, CacheType.EVALUATION)
        if cached is not None:
            return cached

    result = solve_steady_state(
        scenario, design, cache=cache, config=solver_config, probe_uniqueness=probe_uniqueness
    )
    if not result.converged:
        outcome = EvaluationOutcome(False, penalty, result.status.value, result.detail)
    else:
        solution = result.solution
        try:
            check_conservation(scenario, solution, solver_config.conservation_tolerance)
            plan = solve_transportation(scenario.grid, solution.rho, scenario.speed, rebalance_config)
        except (BalanceError, SolverError) as e:
            logger.info(f"Design rejected after solve: {e}")
            outcome = EvaluationOutcome(False, penalty, "constraint_violation", str(e), solution=solution)
        else:
            solution.derived = replace(solution.derived, rebalancing=plan.counts)
            report = build_report(scenario, solution, plan)
            outcome = EvaluationOutcome(
                True,
                report.cost_per_pax,
                result.status.value,
                detail=f"converged from guess {result.attempts}",
                report=report,
                solution=solution,
                plan=plan,
            )

    if cache is not None:
        cache.set(key, outcome, CacheType.EVALUATION)
    return outcome


def _relative_reduction(baseline: float, value: float) -> float:
    return (baseline - value) / baseline if baseline else 0.0


def compare_designs(
    scenario,
    design: DesignVars,
    baseline: DesignVars,
    cache: Optional[CacheManager] = None,
    solver_config: Optional[SolverConfig] = None,
    rebalance_config: Optional[RebalanceConfig] = None,
) -> Dict[str, Any]:
    """Relative reductions of a design against a baseline design on the same scenario"""
    candidate = evaluate_design(scenario, design, cache, solver_config, rebalance_config)
    reference = evaluate_design(scenario, baseline, cache, solver_config, rebalance_config)
    comparison: Dict[str, Any] = {
        "scenario": scenario.name,
        "design_feasible": candidate.feasible,
        "baseline_feasible": reference.feasible,
    }
    if not (candidate.feasible and reference.feasible):
        return comparison

    ours, theirs = candidate.report, reference.report
    comparison.update(
        {
            "design": ours.to_dict(),
            "baseline": theirs.to_dict(),
            "cost_reduction": _relative_reduction(theirs.cost_per_pax, ours.cost_per_pax),
            "agency_cost_reduction": _relative_reduction(
                theirs.agency_cost / theirs.total_demand, ours.agency_cost / ours.total_demand
            ),
            "door_to_door_reduction": _relative_reduction(theirs.mean_door_to_door, ours.mean_door_to_door),
        }
    )
    return comparison
