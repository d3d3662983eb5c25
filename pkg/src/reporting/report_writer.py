"""
Report Writer
JSON report files keyed by vehicle-state name, with numbers kept to a fixed count of
significant digits, plus plot-ready CSV tables
"""
import csv
import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np

from .. import __version__
from ..geometry.zone_grid import ZoneGrid
from ..models.planning_models import EvaluationOutcome, FlowSolution, OptimResult, OracleRow, RebalancePlan, SimMetrics
from ..network.design import DesignVars
from ..network.states import VehicleState

logger = logging.getLogger(__name__)

TOOL_NAME = "rideshare-planner"
DEFAULT_DIGITS = 12


def round_significant(value: Any, digits: int = DEFAULT_DIGITS) -> Any:
    """Round every float inside nested dicts, lists and arrays"""
    if isinstance(value, dict):
        return {str(k): round_significant(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_significant(v, digits) for v in value]
    if isinstance(value, np.ndarray):
        return round_significant(value.tolist(), digits)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not np.isfinite(value):
            return str(value)
        return float(f"{value:.{digits}g}")
    return value


def state_counts(solution: FlowSolution, plan: Optional[RebalancePlan] = None) -> Dict[str, float]:
    """Vehicle count of every state, keyed by state name"""
    derived = solution.derived
    counts: Dict[str, float] = {}
    size = solution.size
    for a in range(size):
        i = a + 1
        counts[VehicleState(i).name] = solution.n_idle[a]
        counts[VehicleState(i, i).name] = derived.assigned_empty[a]
        counts[VehicleState(i, None, i).name] = solution.n_seeker_local[a]
        counts[VehicleState(i, i, i).name] = derived.assigned_local[a]
        counts[VehicleState(i, None, i, i).name] = derived.full_local_local[a]
        for b in range(size):
            if a == b:
                continue
            j = b + 1
            counts[VehicleState(i, None, j).name] = solution.n_seeker_remote[a, b]
            counts[VehicleState(i, i, j).name] = derived.assigned_remote[a, b]
            counts[VehicleState(i, None, i, j).name] = derived.full_local_remote[a, b]
            rebalancing = plan.counts[a, b] if plan is not None else derived.rebalancing[a, b]
            counts[VehicleState(i, j).name] = rebalancing
    for n, (a, b, c) in enumerate(solution.flows.full_index):
        counts[VehicleState(a + 1, None, b + 1, c + 1).name] = derived.full_remote_remote[n]
    return {name: float(value) for name, value in counts.items()}


def seeker_border_flows(grid: ZoneGrid, solution: FlowSolution, design: DesignVars) -> Dict[str, float]:
    """Seeker vehicles crossing each border per hour, keyed 'zone->next:destination'"""
    flows: Dict[str, float] = {}
    for (i, j), fractions in sorted(design.delta.items()):
        exits = solution.flows.g_remote[i - 1, j - 1]
        for via, share in sorted(fractions.items()):
            flows[f"{i}->{via}:{j}"] = float(exits * share)
    return flows


def solution_dict(grid: ZoneGrid, solution: FlowSolution, design: DesignVars, plan: Optional[RebalancePlan]) -> Dict[str, Any]:
    flows = solution.flows
    return {
        "counts": state_counts(solution, plan),
        "rates": {
            "seeker_exits": {f"{i + 1}->{j + 1}": flows.g_remote[i, j] for i in range(solution.size) for j in range(solution.size) if i != j},
            "seeker_border_flows": seeker_border_flows(grid, solution, design),
            "local_deliveries": flows.d_local,
            "net_rebalancing": solution.rho,
            "theta_local": solution.theta_local,
        },
        "residual_norm": solution.residual_norm,
        "iterations": solution.iterations,
    }


def plan_dict(plan: RebalancePlan) -> Dict[str, Any]:
    return {
        "flows": plan.nonzero_flows(),
        "vehicle_hours": plan.vehicle_hours,
        "objective": plan.objective,
    }


def _metadata(scenario, command: str) -> Dict[str, Any]:
    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "scenario": scenario.name,
        "scenario_digest": scenario.digest(),
    }


def evaluation_report(scenario, design: DesignVars, outcome: EvaluationOutcome, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Report-file dictionary of one evaluated design"""
    report: Dict[str, Any] = {
        "meta": _metadata(scenario, "evaluate"),
        "design": design.to_spec(scenario.grid),
        "feasible": outcome.feasible,
        "status": outcome.status,
        "detail": outcome.detail,
        "objective": outcome.objective,
    }
    if outcome.feasible:
        report["performance"] = outcome.report.to_dict()
        report["solution"] = solution_dict(scenario.grid, outcome.solution, design, outcome.plan)
        report["rebalancing"] = plan_dict(outcome.plan)
    if extra:
        report.update(extra)
    return report


def optimization_report(scenario, result: OptimResult, settings: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    report = evaluation_report(
        scenario,
        result.best_design,
        EvaluationOutcome(
            True, result.best_objective, "converged", report=result.best_report,
            solution=result.best_solution, plan=result.best_plan,
        ),
    )
    report["meta"]["command"] = "optimize"
    report["settings"] = settings or {}
    report["starts"] = [asdict(s) for s in result.starts_summary]
    report["trace"] = [asdict(t) for t in result.trace]
    return report


def simulation_report(scenario, metrics: SimMetrics, diagnostics: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    report = {"meta": _metadata(scenario, "simulate"), "metrics": metrics.to_dict()}
    if diagnostics is not None:
        report["diagnostics"] = diagnostics
    return report


def rebalance_report(scenario, rho: np.ndarray, plan: RebalancePlan) -> Dict[str, Any]:
    return {
        "meta": _metadata(scenario, "rebalance"),
        "rho": np.asarray(rho, dtype=float),
        "rebalancing": plan_dict(plan),
    }


def comparison_report(scenario, comparison: Dict[str, Any]) -> Dict[str, Any]:
    return {"meta": _metadata(scenario, "compare"), **comparison}


def sweep_report(scenario, rows: List[Dict[str, Any]], settings: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return {"meta": _metadata(scenario, "sweep"), "settings": settings or {}, "rows": rows}


def oracle_rows(rows: Iterable[OracleRow], tolerance: float) -> List[Dict[str, Any]]:
    return [
        {
            "name": row.name,
            "estimate": row.estimate,
            "std_error": row.std_error,
            "expected": row.expected,
            "relative_error": row.relative_error,
            "samples": row.samples,
            "result": "PASS" if row.passed(tolerance) else "FAIL",
        }
        for row in rows
    ]


def zone_table(scenario, design: DesignVars, outcome: EvaluationOutcome) -> List[Dict[str, Any]]:
    """Per-zone bars: idle, seekers and all active vehicles"""
    solution = outcome.solution
    rows = []
    for a, i in enumerate(scenario.grid.zone_ids):
        rows.append(
            {
                "zone": i,
                "idle": float(design.n_idle[a]),
                "seeker_local": float(solution.n_seeker_local[a]),
                "seeker_remote": float(solution.n_seeker_remote[a].sum()),
                "active": float(outcome.report.per_zone_active[a]),
                "net_rebalancing": float(solution.rho[a]),
            }
        )
    return rows


def write_json(data: Dict[str, Any], path: Union[str, Path], digits: int = DEFAULT_DIGITS) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(round_significant(data, digits), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote report {path}")
    return path


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_csv(rows: List[Dict[str, Any]], path: Union[str, Path], digits: int = DEFAULT_DIGITS) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fieldnames: List[str] = []
    for row in rows:
        fieldnames.extend(k for k in row if k not in fieldnames)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(round_significant(row, digits))
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path
