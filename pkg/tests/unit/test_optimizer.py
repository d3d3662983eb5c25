"""
Unit tests for the design optimizer and parameter sweeps
"""
import time

import numpy as np
import pytest

from src.config.config_manager import CacheConfig, OptimizerConfig, RebalanceConfig, SolverConfig
from src.evaluation.evaluator import compare_designs, evaluate_design
from src.exceptions import OptimizationError
from src.models.planning_models import EvaluationOutcome
from src.network.design import DesignVars
from src.optimization.optimizer import (
    IDLE_HEURISTIC_SHARE,
    DesignSearch,
    idle_heuristic,
    idle_upper_bounds,
    optimize,
    sweep,
)
from src.scenario.catalog import builtin_design, builtin_scenario


@pytest.fixture
def quick_config():
    return OptimizerConfig(multistarts=2, max_iters=8, seed=3)


@pytest.fixture
def search(s1_scenario, quick_config):
    return DesignSearch(s1_scenario, quick_config, SolverConfig(), RebalanceConfig(), CacheConfig())


class TestIdleBounds:
    """Test idle-count heuristics"""

    def test_heuristic_value(self, s1_scenario):
        """Test 5% of trip ends times a zone crossing time"""
        demand = s1_scenario.demand
        ends = demand.sum(axis=1) + demand.sum(axis=0)
        expected = np.maximum(1.0, IDLE_HEURISTIC_SHARE * ends * 5.0 / 25.0)
        np.testing.assert_allclose(idle_heuristic(s1_scenario), expected)

    def test_default_upper(self, s1_scenario):
        upper = idle_upper_bounds(s1_scenario, OptimizerConfig())
        np.testing.assert_allclose(upper, 10.0 * idle_heuristic(s1_scenario))

    def test_explicit_upper(self, s1_scenario):
        upper = idle_upper_bounds(s1_scenario, OptimizerConfig(idle_upper=[50, 60, 70, 80]))
        np.testing.assert_allclose(upper, [50, 60, 70, 80])

    def test_explicit_upper_wrong_length(self, s1_scenario):
        with pytest.raises(ValueError, match="idle_upper"):
            idle_upper_bounds(s1_scenario, OptimizerConfig(idle_upper=[50, 60]))


class TestDesignSearch:
    """Test one multistart run"""

    def test_random_start_in_box(self, search):
        """Test starts lie in the unit box and map to valid designs"""
        rng = np.random.default_rng(0)
        for _ in range(20):
            u = search.random_start(rng)
            assert np.all(u >= 0.0) and np.all(u <= 1.0 + 1e-12)
            search.design_at(u).validate(search.scenario.grid)

    def test_design_at_projects(self, search):
        """Test points outside the box are projected onto it"""
        u = np.full(search.param.dimension, 2.0)
        u[0] = -1.0
        design = search.design_at(u)
        design.validate(search.scenario.grid)
        np.testing.assert_allclose(design.n_idle, search.upper[search.param.route_dimension:])

    def test_gradient_of_linear_objective(self, search, mocker):
        """Test finite differences recover a linear objective's slope"""
        slope = np.linspace(1.0, 2.0, search.param.dimension)
        mocker.patch.object(search, "objective", side_effect=lambda u: float(slope @ u))
        u = np.full(search.param.dimension, 0.5)
        np.testing.assert_allclose(search.gradient(u, float(slope @ u)), slope, rtol=1e-6)

    def test_gradient_one_sided_at_bound(self, search, mocker):
        slope = np.ones(search.param.dimension)
        mocker.patch.object(search, "objective", side_effect=lambda u: float(slope @ u))
        u = np.zeros(search.param.dimension)
        np.testing.assert_allclose(search.gradient(u, 0.0), slope, rtol=1e-6)

    def test_all_infeasible_start(self, search, mocker):
        """Test a start that never finds a feasible point reports infeasible"""
        infeasible = EvaluationOutcome(False, 1e4, "unservable", "no vehicles")
        mocker.patch.object(search, "evaluate", return_value=infeasible)
        outcome = search.run(0, 11)
        assert not outcome.summary.feasible
        assert outcome.summary.best_objective == 1e4


class TestOptimize:
    """Test the multistart optimizer"""

    def test_all_starts_infeasible(self, s1_scenario, quick_config, mocker):
        """Test every start failing raises with per-start diagnostics"""
        infeasible = EvaluationOutcome(False, 1e4, "unservable", "no vehicles")
        mocker.patch("src.optimization.optimizer.evaluate_design", return_value=infeasible)
        with pytest.raises(OptimizationError) as exc_info:
            optimize(s1_scenario, quick_config)
        assert len(exc_info.value.diagnostics) == 2
        assert exc_info.value.diagnostics[0]["status"] == "unservable"

    def test_multistarts_validated(self, s1_scenario):
        with pytest.raises(ValueError):
            optimize(s1_scenario, OptimizerConfig(multistarts=0))

    @pytest.mark.slow
    def test_deterministic(self, s1_scenario, quick_config):
        """Test identical seeds give identical designs"""
        first = optimize(s1_scenario, quick_config)
        second = optimize(s1_scenario, quick_config)
        assert first.best_objective == second.best_objective
        assert first.best_design.digest() == second.best_design.digest()

    @pytest.mark.slow
    def test_trace_best_monotone(self, s1_scenario, quick_config):
        """Test the running best never increases within a start"""
        result = optimize(s1_scenario, quick_config)
        for start in range(quick_config.multistarts):
            best = [e.best_objective for e in result.trace if e.start == start]
            assert all(b <= a for a, b in zip(best, best[1:]))
        assert len(result.starts_summary) == 2

    @pytest.mark.slow
    def test_result_design_valid(self, s1_scenario, quick_config):
        """Test the returned design is feasible and inside its bounds"""
        result = optimize(s1_scenario, quick_config)
        result.best_design.validate(s1_scenario.grid)
        upper = idle_upper_bounds(s1_scenario, quick_config)
        assert np.all(result.best_design.n_idle <= upper + 1e-9)
        assert result.best_report.cost_per_pax == pytest.approx(result.best_objective)

    @pytest.mark.slow
    def test_sweep_rows(self, s1_scenario):
        rows = sweep(s1_scenario, [10.0, 20.0], [1.0], OptimizerConfig(multistarts=1, max_iters=3))
        assert [(r["beta"], r["scale"]) for r in rows] == [(10.0, 1.0), (20.0, 1.0)]
        assert all(r["feasible"] for r in rows)
        assert rows[0]["cost_per_pax"] < rows[1]["cost_per_pax"]


class TestSweep:
    """Test sweep bookkeeping without solving"""

    def test_infeasible_point_recorded(self, s1_scenario, mocker):
        mocker.patch("src.optimization.optimizer.optimize", side_effect=OptimizationError("all starts infeasible"))
        rows = sweep(s1_scenario, [20.0], [1.0, 2.0])
        assert rows == [
            {"beta": 20.0, "scale": 1.0, "feasible": False},
            {"beta": 20.0, "scale": 2.0, "feasible": False},
        ]


@pytest.fixture(scope="module")
def full_optimum():
    """Eight-start optimum of a built-in scenario, computed once per module"""
    results = {}

    def run(name):
        if name not in results:
            config = OptimizerConfig(multistarts=8, seed=0, workers=4)
            results[name] = optimize(builtin_scenario(name), config)
        return results[name]

    return run


@pytest.mark.slow
class TestFullBudget:
    """Test full-budget optimization of the built-in scenarios"""

    @pytest.mark.parametrize("name", ["s1", "s2", "s3"])
    def test_improves_on_reported_design(self, full_optimum, name):
        """Test the optimum is within half a percent of the reported design or better"""
        scenario = builtin_scenario(name)
        reference = evaluate_design(scenario, builtin_design(name, scenario.grid)).objective
        assert full_optimum(name).best_objective <= reference * 1.005

    def test_benchmark_idle_counts_near_zero(self, full_optimum):
        result = full_optimum("benchmark")
        assert result.best_report is not None
        assert np.all(result.best_design.n_idle <= 1.0)

    @pytest.mark.parametrize("name", ["s1", "s2", "s3"])
    def test_gap_to_benchmark_design(self, full_optimum, name):
        """Test the benchmark optimum run on an uneven scenario costs 19.5% to 35% more than its optimum"""
        benchmark = full_optimum("benchmark").best_design
        comparison = compare_designs(builtin_scenario(name), full_optimum(name).best_design, benchmark)
        assert comparison["design_feasible"] and comparison["baseline_feasible"]
        assert 0.195 <= comparison["cost_reduction"] <= 0.35

    def test_nine_zone_idle_peak(self):
        """Test the 3x3 optimum keeps most idle vehicles in the zone with most incoming trips"""
        scenario = builtin_scenario("chicago3x3")
        result = optimize(scenario, OptimizerConfig(multistarts=4, max_iters=30, seed=0, workers=4))
        peak_zone = int(np.argmax(scenario.demand.sum(axis=0))) + 1
        assert peak_zone == 3
        assert int(np.argmax(result.best_design.n_idle)) + 1 == peak_zone


class TestNineZoneEvaluation:
    """Test evaluation speed on the 3x3 grid"""

    @pytest.mark.slow
    def test_evaluation_within_one_second(self):
        scenario = builtin_scenario("chicago3x3")
        design = DesignVars.uniform(scenario.grid, idle_heuristic(scenario))
        evaluate_design(scenario, design)
        started = time.perf_counter()
        outcome = evaluate_design(scenario, design)
        elapsed = time.perf_counter() - started
        assert outcome.feasible, outcome.detail
        assert elapsed <= 1.0
