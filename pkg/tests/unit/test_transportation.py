"""
Unit tests for the rebalancing transportation problem
"""
import networkx as nx
import numpy as np
import pytest

from src.config.config_manager import RebalanceConfig
from src.exceptions import BalanceError
from src.geometry.zone_grid import ZoneGrid
from src.rebalancing.transportation import (
    rebalancing_cost,
    rebalancing_cost_matrix,
    solve_transportation,
)


def _min_cost_flow_objective(grid, rho, speed):
    """Reference optimum from networkx on integer costs"""
    graph = nx.DiGraph()
    for i in grid.zone_ids:
        graph.add_node(i, demand=-int(rho[i - 1]))
    costs = rebalancing_cost_matrix(grid, speed)
    for i in grid.zone_ids:
        for j in grid.zone_ids:
            if i != j:
                graph.add_edge(i, j, weight=int(round(costs[i - 1, j - 1])))
    return nx.cost_of_flow(graph, nx.min_cost_flow(graph))


class TestRebalancingCost:
    """Test per-trip rebalancing times"""

    def test_diagonal_and_aligned(self, grid_2x2):
        """Test diagonal trips cost the zone distance and aligned trips a third more"""
        assert rebalancing_cost(grid_2x2, 1, 4, 25.0) == pytest.approx(10.0 / 25.0)
        assert rebalancing_cost(grid_2x2, 1, 2, 25.0) == pytest.approx((5.0 + 5.0 / 3.0) / 25.0)

    def test_same_zone(self, grid_2x2):
        with pytest.raises(ValueError):
            rebalancing_cost(grid_2x2, 2, 2, 25.0)

    def test_matrix_symmetric(self, irregular_grid):
        costs = rebalancing_cost_matrix(irregular_grid, 25.0)
        np.testing.assert_allclose(costs, costs.T)
        assert np.all(np.diag(costs) == 0.0)


class TestSolveTransportation:
    """Test minimum-cost rebalancing flows"""

    def test_two_zones(self, grid_1x2):
        """Test ten vehicles per hour moved one zone over"""
        plan = solve_transportation(grid_1x2, np.array([10.0, -10.0]), 1.0)
        assert plan.flows[0, 1] == pytest.approx(10.0)
        assert plan.flows[1, 0] == 0.0
        assert plan.objective == pytest.approx(40.0 / 3.0)
        assert plan.nonzero_flows() == {"1->2": pytest.approx(10.0)}

    def test_direct_diagonal_route(self, grid_2x2):
        """Test a diagonal move is cheaper than two aligned hops"""
        plan = solve_transportation(grid_2x2, np.array([10.0, 0.0, 0.0, -10.0]), 25.0)
        assert plan.flows[0, 3] == pytest.approx(10.0)
        assert plan.objective == pytest.approx(4.0)
        assert plan.vehicle_hours == pytest.approx(4.0)

    def test_zero_rates(self, grid_2x2):
        plan = solve_transportation(grid_2x2, np.zeros(4), 25.0)
        assert np.all(plan.flows == 0.0)
        assert plan.objective == 0.0

    def test_flow_balance(self, irregular_grid):
        """Test outflow minus inflow equals rho in every zone"""
        rng = np.random.default_rng(4)
        rho = rng.normal(0, 10, irregular_grid.size)
        rho -= rho.mean()
        plan = solve_transportation(irregular_grid, rho, 25.0)
        net = plan.flows.sum(axis=1) - plan.flows.sum(axis=0)
        np.testing.assert_allclose(net, rho, atol=1e-7)
        assert np.all(plan.flows >= 0.0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_min_cost_flow(self, seed):
        """Test the optimum against an integer min-cost-flow solve"""
        grid = ZoneGrid.from_layout(3, 3, 3.0)
        rng = np.random.default_rng(seed)
        rho = rng.integers(-20, 21, grid.size).astype(float)
        rho[-1] -= rho.sum()
        plan = solve_transportation(grid, rho, 1.0)
        assert plan.objective == pytest.approx(_min_cost_flow_objective(grid, rho, 1.0), rel=1e-9)

    def test_homogeneous(self, grid_2x2):
        """Test scaling rho scales the flows"""
        rho = np.array([7.0, -3.0, 1.0, -5.0])
        base = solve_transportation(grid_2x2, rho, 25.0)
        scaled = solve_transportation(grid_2x2, 3.0 * rho, 25.0)
        assert scaled.objective == pytest.approx(3.0 * base.objective)

    def test_no_opposing_flows(self, irregular_grid):
        rng = np.random.default_rng(9)
        rho = rng.normal(0, 5, irregular_grid.size)
        rho -= rho.mean()
        flows = solve_transportation(irregular_grid, rho, 25.0).flows
        assert not np.any((flows > 0) & (flows.T > 0))

    def test_deterministic(self, irregular_grid):
        """Test repeated solves agree exactly"""
        rho = np.zeros(irregular_grid.size)
        rho[0], rho[5], rho[15] = 6.0, 2.0, -8.0
        first = solve_transportation(irregular_grid, rho, 25.0)
        second = solve_transportation(irregular_grid, rho, 25.0)
        np.testing.assert_array_equal(first.flows, second.flows)

    def test_tie_break_disabled(self, grid_2x2):
        plan = solve_transportation(grid_2x2, np.array([10.0, 0.0, 0.0, -10.0]), 25.0, RebalanceConfig(tie_break=False))
        assert plan.objective == pytest.approx(4.0)

    def test_imbalance(self, grid_2x2):
        """Test rates that do not sum to zero are rejected"""
        with pytest.raises(BalanceError, match="balance"):
            solve_transportation(grid_2x2, np.array([10.0, -5.0, 0.0, 0.0]), 25.0)

    def test_shape_mismatch(self, grid_2x2):
        with pytest.raises(BalanceError):
            solve_transportation(grid_2x2, np.array([1.0, -1.0]), 25.0)

    def test_non_finite(self, grid_2x2):
        with pytest.raises(BalanceError):
            solve_transportation(grid_2x2, np.array([np.nan, 0.0, 0.0, 0.0]), 25.0)

    def test_opposing_flows_left_after_netting(self, grid_1x2, mocker):
        """Test opposing flows surviving the netting pass are an error"""

        def leave_cycle(flows, tolerance):
            flows[0, 1] += 1.0
            flows[1, 0] += 1.0
            return 0

        mocker.patch("src.rebalancing.transportation._net_opposing_flows", side_effect=leave_cycle)
        with pytest.raises(BalanceError, match="opposing"):
            solve_transportation(grid_1x2, np.array([10.0, -10.0]), 1.0)
