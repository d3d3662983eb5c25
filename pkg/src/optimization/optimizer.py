"""
Design Optimizer
Multistart projected-gradient search over path fractions and idle-vehicle counts
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from ..config.config_manager import CacheConfig, OptimizerConfig, RebalanceConfig, SolverConfig
from ..evaluation.evaluator import evaluate_design
from ..exceptions import OptimizationError
from ..infrastructure.caching.cache_manager import CacheManager
from ..models.planning_models import EvaluationOutcome, OptimResult, StartSummary, TraceEntry
from ..network.design import DesignParameterization, DesignVars

logger = logging.getLogger(__name__)

ARMIJO = 1e-4
IDLE_HEURISTIC_SHARE = 0.05
LOG_UNIFORM_SPAN = 100.0


def idle_heuristic(scenario) -> np.ndarray:
    """Demand-based idle count per zone: 5% of the zone's trip ends times a zone crossing time"""
    demand = scenario.demand
    trip_ends = demand.sum(axis=1) + demand.sum(axis=0)
    return np.maximum(1.0, IDLE_HEURISTIC_SHARE * trip_ends * scenario.phi / scenario.speed)


def idle_upper_bounds(scenario, config: OptimizerConfig) -> np.ndarray:
    if config.idle_upper is not None:
        upper = np.asarray(config.idle_upper, dtype=float)
        if upper.shape != (scenario.size,):
            raise ValueError(f"idle_upper needs {scenario.size} entries, got {upper.shape}")
        return upper
    return config.idle_upper_factor * idle_heuristic(scenario)


@dataclass
class _StartOutcome:
    summary: StartSummary
    trace: List[TraceEntry] = field(default_factory=list)
    best_vector: Optional[np.ndarray] = None
    best: Optional[EvaluationOutcome] = None


class DesignSearch:
    """One start of the search in coordinates normalised to the unit box"""

    def __init__(
        self,
        scenario,
        config: OptimizerConfig,
        solver_config: SolverConfig,
        rebalance_config: RebalanceConfig,
        cache_config: CacheConfig,
    ):
        self.scenario = scenario
        self.config = config
        self.solver_config = solver_config
        self.rebalance_config = rebalance_config
        self.param = DesignParameterization(scenario.grid)
        self.template = DesignVars.uniform(scenario.grid, 0.0)
        self.lower, self.upper = self.param.bounds(idle_upper_bounds(scenario, config))
        self.scale = self.upper - self.lower
        self.cache = CacheManager(cache_config)
        self.evaluations = 0
        self.logger = logging.getLogger(__name__)

    def design_at(self, u: np.ndarray) -> DesignVars:
        return self.param.from_vector(self.lower + self.scale * np.clip(u, 0.0, 1.0), self.template)

    def evaluate(self, u: np.ndarray) -> EvaluationOutcome:
        self.evaluations += 1
        return evaluate_design(
            self.scenario,
            self.design_at(u),
            cache=self.cache,
            solver_config=self.solver_config,
            rebalance_config=self.rebalance_config,
            penalty=self.config.infeasible_penalty,
        )

    def objective(self, u: np.ndarray) -> float:
        return self.evaluate(u).objective

    def random_start(self, rng: np.random.Generator) -> np.ndarray:
        """Shares uniform on each pair's simplex, idle counts log-uniform within the bounds"""
        routes = rng.uniform(0.0, 1.0, self.param.route_dimension)
        idle_upper = self.upper[self.param.route_dimension:]
        low = np.log(idle_upper / LOG_UNIFORM_SPAN)
        idle = np.exp(rng.uniform(low, np.log(idle_upper)))
        x = np.concatenate([routes, idle])
        return (x - self.lower) / self.scale

    def gradient(self, u: np.ndarray, value: float) -> np.ndarray:
        """Central differences in design units with one-sided steps at the bounds"""
        x = self.lower + self.scale * u
        grad = np.zeros_like(u)
        for n in range(u.size):
            step = max(self.config.grad_step * abs(x[n]), self.config.grad_floor)
            du = step / self.scale[n]
            up = min(u[n] + du, 1.0)
            down = max(u[n] - du, 0.0)
            if up == down:
                continue
            f_up = value if up == u[n] else self.objective(self._shifted(u, n, up))
            f_down = value if down == u[n] else self.objective(self._shifted(u, n, down))
            grad[n] = (f_up - f_down) / (up - down)
        return grad

    @staticmethod
    def _shifted(u: np.ndarray, n: int, value: float) -> np.ndarray:
        shifted = u.copy()
        shifted[n] = value
        return shifted

    def run(self, start: int, seed: Any) -> _StartOutcome:
        rng = np.random.default_rng(seed)

        u = self.random_start(rng)
        current = self.evaluate(u)
        for _ in range(self.config.max_resamples):
            if current.feasible:
                break
            u = self.random_start(rng)
            current = self.evaluate(u)

        best_u, best = u.copy(), current
        trace = [TraceEntry(start, 0, current.objective, current.feasible, best.objective)]
        stale = 0
        stop_reason = "max_iters"
        iteration = 0

        for iteration in range(1, self.config.max_iters + 1):
            grad = self.gradient(u, current.objective)
            largest = float(np.max(np.abs(grad), initial=0.0))
            if largest == 0.0:
                stop_reason = "stationary"
                break

            step = self.config.initial_step / largest
            accepted = None
            for _ in range(self.config.max_halvings + 1):
                candidate_u = np.clip(u - step * grad, 0.0, 1.0)
                moved = candidate_u - u
                if np.any(moved != 0.0):
                    candidate = self.evaluate(candidate_u)
                    if candidate.objective <= current.objective + ARMIJO * float(grad @ moved):
                        accepted = (candidate_u, candidate, step)
                        break
                step *= 0.5

            if accepted is None:
                trace.append(TraceEntry(start, iteration, current.objective, current.feasible, best.objective))
                stop_reason = "no_descent"
                break

            previous = current.objective
            u, current, step = accepted
            if current.objective < best.objective:
                best_u, best = u.copy(), current

            trace.append(
                TraceEntry(start, iteration, current.objective, current.feasible, best.objective, step=step)
            )
            if previous - current.objective < self.config.min_improvement * max(1.0, abs(previous)):
                stale += 1
                if stale >= self.config.no_improve_patience:
                    stop_reason = "no_improvement"
                    break
            else:
                stale = 0

        self.logger.info(
            f"Start {start}: best Z {best.objective:.4f} ({'feasible' if best.feasible else 'infeasible'}) "
            f"after {iteration} iterations, {self.evaluations} evaluations, stop: {stop_reason}"
        )
        summary = StartSummary(start, best.objective, best.feasible, iteration, stop_reason, self.evaluations)
        return _StartOutcome(summary, trace, self.lower + self.scale * best_u, best)


def _run_start(
    start: int,
    seed: Any,
    scenario,
    config: OptimizerConfig,
    solver_config: SolverConfig,
    rebalance_config: RebalanceConfig,
    cache_config: CacheConfig,
) -> _StartOutcome:
    search = DesignSearch(scenario, config, solver_config, rebalance_config, cache_config)
    return search.run(start, seed)


def optimize(
    scenario,
    config: Optional[OptimizerConfig] = None,
    solver_config: Optional[SolverConfig] = None,
    rebalance_config: Optional[RebalanceConfig] = None,
    cache_config: Optional[CacheConfig] = None,
    progress: Optional[Callable[[StartSummary], None]] = None,
) -> OptimResult:
    """Best design over all starts; identical inputs give identical results"""
    config = config or OptimizerConfig()
    solver_config = solver_config or SolverConfig()
    rebalance_config = rebalance_config or RebalanceConfig()
    cache_config = cache_config or CacheConfig()
    if config.multistarts < 1:
        raise ValueError("multistarts must be at least 1")

    seeds = np.random.SeedSequence(config.seed).spawn(config.multistarts)
    logger.info(
        f"Optimizing '{scenario.name}': {config.multistarts} starts, {config.workers} worker(s), seed {config.seed}"
    )
    outcomes: List[_StartOutcome] = Parallel(n_jobs=config.workers)(
        delayed(_run_start)(start, seed, scenario, config, solver_config, rebalance_config, cache_config)
        for start, seed in enumerate(seeds)
    )
    if progress is not None:
        for outcome in outcomes:
            progress(outcome.summary)

    feasible = [o for o in outcomes if o.best is not None and o.best.feasible]
    if not feasible:
        diagnostics = [
            {"start": o.summary.start, "status": o.best.status if o.best else "none", "detail": o.best.detail if o.best else ""}
            for o in outcomes
        ]
        raise OptimizationError(f"all {len(outcomes)} starts ended infeasible", diagnostics)

    winner = min(feasible, key=lambda o: (o.best.objective, o.summary.start))
    param = DesignParameterization(scenario.grid)
    best_design = param.from_vector(winner.best_vector, DesignVars.uniform(scenario.grid, 0.0))
    trace = [entry for o in outcomes for entry in o.trace]

    logger.info(f"Best Z {winner.best.objective:.4f} $/pax from start {winner.summary.start}")
    return OptimResult(
        best_design=best_design,
        best_report=winner.best.report,
        best_solution=winner.best.solution,
        best_plan=winner.best.plan,
        trace=trace,
        starts_summary=[o.summary for o in outcomes],
    )


def sweep(
    scenario,
    betas: Sequence[float],
    scales: Sequence[float],
    config: Optional[OptimizerConfig] = None,
    solver_config: Optional[SolverConfig] = None,
    rebalance_config: Optional[RebalanceConfig] = None,
    cache_config: Optional[CacheConfig] = None,
) -> List[Dict[str, Any]]:
    """Optimized design metrics for every (value of time, demand scale) combination"""
    rows: List[Dict[str, Any]] = []
    for beta in betas:
        for scale in scales:
            case = scenario.with_value_of_time(float(beta)).with_demand_scale(float(scale))
            row: Dict[str, Any] = {"beta": float(beta), "scale": float(scale)}
            try:
                result = optimize(case, config, solver_config, rebalance_config, cache_config)
            except OptimizationError as e:
                logger.warning(f"Sweep point beta={beta}, q={scale} infeasible: {e}")
                row.update({"feasible": False})
                rows.append(row)
                continue
            report = result.best_report
            row.update(
                {
                    "feasible": True,
                    **{f"idle_{z}": float(v) for z, v in zip(scenario.grid.zone_ids, result.best_design.n_idle)},
                    "active_total": float(np.sum(report.per_zone_active)),
                    "rebalancing": report.rebalancing,
                    "total_fleet": report.total_fleet,
                    "passenger_hours": report.passenger_hours,
                    "cost_per_pax": report.cost_per_pax,
                }
            )
            rows.append(row)
    return rows
