"""
Steady-State Solver
Damped Newton iteration on the reduced seeker-count system with finite-difference
Jacobians, multiple starting guesses and a conservation audit of the result
"""
import logging
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from ..config.config_manager import SolverConfig
from ..exceptions import SolverError, UnservableError
from ..infrastructure.caching.cache_manager import CacheManager
from ..models.planning_models import FlowSolution, SolveStatus, SteadyStateResult
from .design import DesignVars
from .equations import EquationSystem, SystemState, little_law_counts
from .topology import topology_for

logger = logging.getLogger(__name__)

HEURISTIC_SCALE = 0.5
GUESS_FLOOR = 1e-6
ARMIJO = 1e-4


def heuristic_guess(scenario) -> np.ndarray:
    """Occupancy-time seed: demand times a typical in-zone travel time, halved"""
    topology = topology_for(scenario.grid)
    travel = scenario.phi / scenario.speed
    demand = scenario.demand
    local = HEURISTIC_SCALE * np.diag(demand) * travel / 8.0
    remote = HEURISTIC_SCALE * demand * travel
    return np.maximum(topology.pack(local, remote), GUESS_FLOOR)


def supplied_zones(scenario, design: DesignVars) -> Set[int]:
    """
    Zones that can hold a suitable vehicle: zones with idle vehicles, plus every
    zone on a positive-fraction route of a trip starting in a supplied zone
    """
    grid = scenario.grid
    demand = scenario.demand
    supplied = {z for z in grid.zone_ids if design.n_idle[z - 1] > 0}
    changed = True
    while changed:
        changed = False
        for origin in sorted(supplied):
            for dest in grid.zone_ids:
                if dest == origin or demand[origin - 1, dest - 1] <= 0:
                    continue
                for zone in _route_zones(design, origin, dest):
                    if zone not in supplied:
                        supplied.add(zone)
                        changed = True
    return supplied


def _route_zones(design: DesignVars, origin: int, dest: int) -> Set[int]:
    reached: Set[int] = set()
    frontier = [origin]
    while frontier:
        zone = frontier.pop()
        if zone == dest:
            continue
        for via, share in design.delta.get((zone, dest), {}).items():
            if share > 0 and via not in reached:
                reached.add(via)
                frontier.append(via)
    return reached


def unservable_zones(scenario, design: DesignVars) -> List[int]:
    """Zones with outgoing demand that no vehicle can ever reach"""
    supplied = supplied_zones(scenario, design)
    outgoing = scenario.demand.sum(axis=1)
    return [z for z in scenario.grid.zone_ids if outgoing[z - 1] > 0 and z not in supplied]


class NewtonSolver:
    """Damped Newton with backtracking on the count residual; x is kept non-negative"""

    def __init__(self, system: EquationSystem, config: SolverConfig):
        self.system = system
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.flow_scale = 1.0 + float(np.max(system.scenario.demand))

    def _evaluate(self, x: np.ndarray) -> Tuple[Optional[SystemState], Optional[np.ndarray]]:
        try:
            state = self.system.state(x)
        except UnservableError:
            return None, None
        return state, self.system.count_residual(state)

    def converged(self, state: SystemState, x: np.ndarray, residual: np.ndarray) -> bool:
        flow_norm = float(np.max(np.abs(self.system.flow_residual(state)), initial=0.0))
        count_norm = float(np.max(np.abs(residual), initial=0.0))
        return (
            flow_norm <= self.config.tolerance * self.flow_scale
            and count_norm <= self.config.count_tolerance * (1.0 + float(np.max(x, initial=0.0)))
        )

    def jacobian(self, x: np.ndarray, residual: np.ndarray) -> np.ndarray:
        size = x.size
        J = np.empty((size, size))
        for col in range(size):
            step = self.config.fd_step * max(1.0, abs(x[col]))
            perturbed = x.copy()
            perturbed[col] += step
            _, shifted = self._evaluate(perturbed)
            J[:, col] = 0.0 if shifted is None else (shifted - residual) / step
        return J

    def solve(self, x0: np.ndarray) -> Tuple[str, np.ndarray, Optional[SystemState], int]:
        """Returns (outcome, x, state, iterations); outcome is converged, stalled or unservable"""
        x = np.maximum(np.asarray(x0, dtype=float), 0.0)
        state, residual = self._evaluate(x)
        if state is None:
            return "unservable", x, None, 0

        iterations = self.config.max_iterations
        for iteration in range(self.config.max_iterations):
            if self.converged(state, x, residual):
                return "converged", x, state, iteration

            J = self.jacobian(x, residual)
            try:
                step = np.linalg.solve(J, -residual)
            except np.linalg.LinAlgError:
                step, *_ = np.linalg.lstsq(J, -residual, rcond=None)

            current_norm = float(np.linalg.norm(residual))
            step_size = 1.0
            accepted = False
            for _ in range(self.config.max_backtracks):
                candidate = np.maximum(x + step_size * step, 0.0)
                candidate_state, candidate_residual = self._evaluate(candidate)
                if candidate_state is not None:
                    candidate_norm = float(np.linalg.norm(candidate_residual))
                    if candidate_norm <= (1.0 - ARMIJO * step_size) * current_norm:
                        x, state, residual = candidate, candidate_state, candidate_residual
                        accepted = True
                        break
                step_size *= 0.5

            if not accepted:
                self.logger.debug(f"Line search stalled at iteration {iteration}, |F| = {current_norm:.3e}")
                iterations = iteration
                break

        if self.converged(state, x, residual):
            return "converged", x, state, iterations
        return "stalled", x, state, iterations


def _negative_entries(state: SystemState, tolerance: float) -> Optional[str]:
    flows, pickups = state.flows, state.pickups
    named = {
        "g_i0j0": flows.g_remote,
        "c_i0j0": flows.c_remote,
        "c_i0i0": flows.c_local,
        "c_i0ii": flows.c_local_local,
        "c_i0ij": flows.c_local_remote,
        "d_i0ij": flows.d_local_remote,
        "d_i0i0": flows.d_local,
        "g_i0jk": flows.g_full,
        "c_i0jk": flows.c_full,
        "p_iij0": pickups.remote_intra,
        "p_iik0": pickups.remote_inter,
    }
    for name, values in named.items():
        if values.size and float(np.min(values)) < -tolerance:
            return f"{name} has minimum {float(np.min(values)):.3e}"
    return None


def _build_solution(scenario, system: EquationSystem, x: np.ndarray, state: SystemState, iterations: int) -> FlowSolution:
    derived = little_law_counts(scenario, state, system.design.n_idle, system.routing)
    return FlowSolution(
        n_idle=system.design.n_idle.copy(),
        n_seeker_local=state.n_seeker_local,
        n_seeker_remote=state.n_seeker_remote,
        counts=state.counts,
        pickups=state.pickups,
        theta_local=state.theta_local,
        theta_remote=state.theta_remote,
        flows=state.flows,
        rho=system.net_rebalancing(state),
        derived=derived,
        residual_norm=float(np.max(np.abs(system.flow_residual(state)), initial=0.0)),
        iterations=iterations,
    )


def _candidate_guesses(scenario, design: DesignVars, init, cache: Optional[CacheManager], budget: int) -> List[np.ndarray]:
    guesses: List[np.ndarray] = []
    if init is not None:
        guesses.append(np.asarray(init, dtype=float))
    if cache is not None:
        guesses.extend(cache.nearest_solutions(design.as_vector()))
    seed = heuristic_guess(scenario)
    guesses.extend([seed, seed * 0.25, seed * 4.0])

    unique: List[np.ndarray] = []
    for guess in guesses:
        if guess.shape != seed.shape:
            continue
        if any(np.array_equal(guess, other) for other in unique):
            continue
        unique.append(guess)
    return unique[:budget]


def solve_steady_state(
    scenario,
    design: DesignVars,
    init: Optional[np.ndarray] = None,
    cache: Optional[CacheManager] = None,
    config: Optional[SolverConfig] = None,
    probe_uniqueness: Optional[bool] = None,
) -> SteadyStateResult:
    """Seeker counts, rates and derived counts of the steady state, or an infeasibility status"""
    config = config or SolverConfig()
    design.validate(scenario.grid)

    unreachable = unservable_zones(scenario, design)
    if unreachable:
        detail = f"no idle or passing vehicles in zone(s) {', '.join(map(str, unreachable))} with outgoing demand"
        logger.info(f"Design unservable: {detail}")
        return SteadyStateResult(SolveStatus.UNSERVABLE, detail=detail)

    system = EquationSystem(scenario, design)
    newton = NewtonSolver(system, config)
    guesses = _candidate_guesses(scenario, design, init, cache, config.guess_budget)

    outcomes: List[str] = []
    for attempt, guess in enumerate(guesses, start=1):
        outcome, x, state, iterations = newton.solve(guess)
        outcomes.append(outcome)
        if outcome != "converged":
            logger.debug(f"Guess {attempt}/{len(guesses)} {outcome}")
            continue

        problem = _negative_entries(state, config.negative_tolerance * (1.0 + newton.flow_scale))
        if problem:
            logger.warning(f"Converged point rejected: {problem}")
            return SteadyStateResult(SolveStatus.NEGATIVE_SOLUTION, detail=problem, attempts=attempt)

        solution = _build_solution(scenario, system, x, state, iterations)
        logger.debug(
            f"Steady state converged from guess {attempt} after {iterations} iterations, "
            f"residual {solution.residual_norm:.2e}"
        )
        if cache is not None:
            cache.remember_solution(design.digest(), design.as_vector(), x)

        result = SteadyStateResult(SolveStatus.CONVERGED, solution=solution, attempts=attempt)
        if probe_uniqueness if probe_uniqueness is not None else config.probe_uniqueness:
            result.uniqueness_gap = _probe_uniqueness(scenario, newton, x, config)
        return result

    if outcomes and all(o == "unservable" for o in outcomes):
        status, detail = SolveStatus.UNSERVABLE, "every starting point leaves a caller class without suitable vehicles"
    else:
        status, detail = SolveStatus.NO_CONVERGENCE, f"no convergence from {len(guesses)} starting points"
    logger.info(f"Steady-state solve failed: {detail}")
    return SteadyStateResult(status, detail=detail, attempts=len(guesses))


def _probe_uniqueness(scenario, newton: NewtonSolver, x: np.ndarray, config: SolverConfig) -> float:
    """Largest relative distance between x and the points reached from other starts"""
    gap = 0.0
    for start in (heuristic_guess(scenario), x * 1.01):
        outcome, other, _, _ = newton.solve(start)
        if outcome != "converged":
            continue
        gap = max(gap, float(np.max(np.abs(other - x), initial=0.0)) / (1.0 + float(np.max(x, initial=0.0))))
    if gap > config.uniqueness_tolerance:
        logger.warning(f"Multiple steady states: converged points differ by {gap:.3e} (relative)")
    return gap


def conservation_audit(scenario, solution: FlowSolution, rebalancing_flows: Optional[np.ndarray] = None) -> Dict[str, float]:
    """
    Max absolute imbalance of every in/out-flow identity of the state network,
    recomputed from the stored rates. Keys name the balanced state family.
    """
    topology = topology_for(scenario.grid)
    off_diagonal = topology.off_diagonal
    pickups, flows = solution.pickups, solution.flows

    def worst(values: np.ndarray) -> float:
        return float(np.max(np.abs(values), initial=0.0))

    assigned_idle = pickups.assigned_idle()
    assigned_local = solution.assigned_local()
    assigned_remote = solution.assigned_remote()

    if rebalancing_flows is None:
        rho = solution.rho
    else:
        b = np.asarray(rebalancing_flows, dtype=float)
        rho = b.sum(axis=1) - b.sum(axis=0)

    full_inflow = np.zeros(0)
    if flows.full_index:
        i, j, k = (np.array(v, dtype=int) for v in zip(*flows.full_index))
        full_inflow = pickups.remote_inter[i, k, j] + np.where(k != j, pickups.remote_inter[i, j, k], 0.0)

    audit = {
        "idle": worst(rho + assigned_idle - flows.d_local),
        "assigned_empty": worst(pickups.idle_intra + pickups.idle_inter.sum(axis=1) - assigned_idle),
        "seeker_local": worst(assigned_local + flows.d_local - flows.c_local - flows.d_local_local - pickups.idle_intra),
        "assigned_with_seeker_local": worst(pickups.local_intra + pickups.local_inter.sum(axis=1) - assigned_local),
        "full_local_local": worst(flows.d_local_local - pickups.local_intra - flows.c_local_local),
        "seeker_remote": worst(
            (flows.g_remote + assigned_remote - pickups.idle_inter - flows.c_remote - flows.d_local_remote)[off_diagonal]
        ),
        "assigned_with_seeker_remote": worst(
            (pickups.remote_intra + pickups.remote_inter.sum(axis=1) - assigned_remote)[off_diagonal]
        ),
        "full_local_remote": worst(
            (flows.d_local_remote - flows.c_local_remote - pickups.local_inter - pickups.remote_intra)[off_diagonal]
        ),
        "full_remote_remote": worst(flows.g_full - flows.c_full - full_inflow) if flows.full_index else 0.0,
    }
    served = float(assigned_idle.sum() + assigned_local.sum() + assigned_remote[off_diagonal].sum())
    audit["throughput"] = abs(served - scenario.total_demand)
    audit["net_rebalancing"] = abs(float(rho.sum()))
    return audit


def check_conservation(scenario, solution: FlowSolution, tolerance: float = 1e-8) -> Dict[str, float]:
    """Raise SolverError when an identity fails beyond tolerance times the largest rate"""
    audit = conservation_audit(scenario, solution)
    limit = tolerance * max(1.0, solution.max_rate(), scenario.total_demand)
    failed = {name: value for name, value in audit.items() if value > limit}
    if failed:
        raise SolverError(f"conservation identities violated: {failed}")
    return audit
