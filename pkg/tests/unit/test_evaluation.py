"""
Unit tests for design evaluation, metrics and design comparison
"""
from dataclasses import replace

import numpy as np
import pytest

from src.config.config_manager import CacheConfig
from src.evaluation.evaluator import DEFAULT_PENALTY, compare_designs, evaluate_design
from src.evaluation.metrics import active_by_zone, passenger_hours, system_cost
from src.infrastructure.caching.cache_manager import CacheManager
from src.network.design import DesignVars
from src.scenario.catalog import builtin_design, builtin_scenario


@pytest.fixture
def s1_outcome(s1_scenario, s1_design):
    return evaluate_design(s1_scenario, s1_design)


class TestEvaluateDesign:
    """Test single-design evaluation"""

    def test_feasible(self, s1_outcome):
        assert s1_outcome.feasible
        assert np.isfinite(s1_outcome.objective)
        assert s1_outcome.objective == pytest.approx(s1_outcome.report.cost_per_pax)

    @pytest.mark.parametrize(
        "name,active,rebalancing,fleet",
        [("s1", 1915, 486, 2401), ("s2", 1984, 199, 2183), ("s3", 1999, 188, 2187)],
    )
    def test_reported_fleet_sizes(self, name, active, rebalancing, fleet):
        """Test published designs reproduce their fleet sizes within 3%"""
        scenario = builtin_scenario(name)
        outcome = evaluate_design(scenario, builtin_design(name, scenario.grid))
        report = outcome.report
        assert report.per_zone_active.sum() == pytest.approx(active, rel=0.03)
        assert report.rebalancing == pytest.approx(rebalancing, rel=0.03)
        assert report.total_fleet == pytest.approx(fleet, rel=0.03)

    def test_report_consistency(self, s1_scenario, s1_outcome):
        """Test M = sum M_i + M_b and the cost split"""
        report = s1_outcome.report
        assert report.total_fleet == pytest.approx(report.per_zone_active.sum() + report.rebalancing)
        assert report.agency_cost == pytest.approx(s1_scenario.vehicle_cost * report.total_fleet)
        assert report.cost_per_pax == pytest.approx(
            (report.agency_cost + report.passenger_cost) / s1_scenario.total_demand
        )
        assert report.mean_door_to_door == pytest.approx(report.passenger_hours / 8000.0)

    def test_rebalancing_counts_stored(self, s1_outcome):
        """Test the solution carries the planned rebalancing counts"""
        np.testing.assert_allclose(s1_outcome.solution.derived.rebalancing, s1_outcome.plan.counts)
        assert s1_outcome.plan.vehicle_hours == pytest.approx(s1_outcome.report.rebalancing)

    def test_active_at_least_idle(self, s1_outcome):
        solution = s1_outcome.solution
        assert np.all(active_by_zone(solution) >= solution.n_idle)

    def test_passenger_hours_positive(self, s1_outcome):
        assert passenger_hours(s1_outcome.solution) > 0

    def test_unservable_penalised(self, s1_scenario):
        """Test infeasible designs return the penalty instead of raising"""
        outcome = evaluate_design(s1_scenario, DesignVars.uniform(s1_scenario.grid, 0.0))
        assert not outcome.feasible
        assert outcome.objective == DEFAULT_PENALTY
        assert outcome.status == "unservable"
        assert outcome.report is None

    def test_custom_penalty(self, s1_scenario):
        outcome = evaluate_design(s1_scenario, DesignVars.uniform(s1_scenario.grid, 0.0), penalty=99.0)
        assert outcome.objective == 99.0

    def test_cached_outcome_reused(self, s1_scenario, s1_design, mocker):
        """Test a second evaluation of the same design skips the solve"""
        cache = CacheManager(CacheConfig())
        first = evaluate_design(s1_scenario, s1_design, cache=cache)
        solve = mocker.patch("src.evaluation.evaluator.solve_steady_state")
        second = evaluate_design(s1_scenario, s1_design, cache=cache)
        solve.assert_not_called()
        assert second is first
        assert cache.get_cache_stats()["performance"]["total_hits"] >= 1

    def test_deterministic(self, s1_scenario, s1_design, s1_outcome):
        again = evaluate_design(s1_scenario, s1_design)
        assert again.objective == s1_outcome.objective


class TestSystemCost:
    """Test the per-passenger cost"""

    def test_value_of_time_zero(self, s1_scenario):
        """Test Z = gamma M / total demand when time is free"""
        scenario = s1_scenario.with_value_of_time(0.0)
        assert system_cost(2000.0, 500.0, scenario) == pytest.approx(scenario.vehicle_cost * 2000.0 / 8000.0)

    def test_vehicle_cost_zero(self, s1_scenario):
        scenario = replace(s1_scenario, vehicle_cost=0.0)
        assert system_cost(2000.0, 500.0, scenario) == pytest.approx(20.0 * 500.0 / 8000.0)

    def test_zero_demand(self, mocker):
        scenario = mocker.Mock(total_demand=0.0, vehicle_cost=52.0, value_of_time=20.0)
        with pytest.raises(ValueError):
            system_cost(1.0, 1.0, scenario)

    def test_monotone_in_value_of_time(self, s1_scenario, s1_design):
        """Test Z grows with the value of time at a fixed design"""
        low = evaluate_design(s1_scenario.with_value_of_time(10.0), s1_design)
        high = evaluate_design(s1_scenario.with_value_of_time(40.0), s1_design)
        assert high.objective > low.objective


class TestCompareDesigns:
    """Test design-against-baseline reductions"""

    def test_self_comparison(self, s1_scenario, s1_design):
        comparison = compare_designs(s1_scenario, s1_design, s1_design)
        assert comparison["design_feasible"] and comparison["baseline_feasible"]
        assert comparison["cost_reduction"] == pytest.approx(0.0)

    def test_infeasible_baseline(self, s1_scenario, s1_design):
        comparison = compare_designs(s1_scenario, s1_design, DesignVars.uniform(s1_scenario.grid, 0.0))
        assert comparison["baseline_feasible"] is False
        assert "cost_reduction" not in comparison
