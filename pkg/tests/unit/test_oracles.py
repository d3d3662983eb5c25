"""
Unit tests for the Monte-Carlo geometry oracles and the future event list
"""
import numpy as np
import pytest

from src.config.config_manager import OracleConfig
from src.simulation.event_engine import EventType, FutureEventList
from src.simulation.oracles import (
    intra_feasible,
    mc_case4_fractions,
    mc_expected_distances,
    mc_intra_feasible_fraction,
    run_oracles,
)

SAMPLES = 20_000


def _within(estimate, std_error, expected, sigmas=5.0):
    return abs(estimate - expected) <= sigmas * std_error + 1e-12


class TestIntraFeasible:
    """Test the zero-detour nesting predicate"""

    def test_nested_destinations(self):
        origin = np.array([[0.1, 0.1]])
        assert intra_feasible(origin, np.array([[0.5, 0.5]]), np.array([[0.9, 0.8]]))[0]
        assert intra_feasible(origin, np.array([[0.9, 0.8]]), np.array([[0.5, 0.5]]))[0]

    def test_crossed_destinations(self):
        """Test destinations that swap order between axes need a detour"""
        origin = np.array([[0.1, 0.1]])
        assert not intra_feasible(origin, np.array([[0.5, 0.9]]), np.array([[0.9, 0.5]]))[0]

    def test_behind_origin(self):
        origin = np.array([[0.5, 0.5]])
        assert not intra_feasible(origin, np.array([[0.9, 0.9]]), np.array([[0.2, 0.9]]))[0]


class TestMatchingShares:
    """Test estimated matching shares"""

    def test_intra_share(self):
        """Test the seeker share is close to 2/9"""
        share, se = mc_intra_feasible_fraction(SAMPLES, 1)
        assert _within(share, se, 2.0 / 9.0)

    def test_far_corner_destination(self):
        """Test a caller bound for the far corner accepts a quarter of seekers"""
        share, se = mc_intra_feasible_fraction(SAMPLES, 2, fixed_destination=(1.0, 1.0))
        assert _within(share, se, 0.25)

    def test_swap_roles_symmetric(self):
        """Test swapping caller and seeker destinations changes nothing"""
        assert mc_intra_feasible_fraction(5000, 3) == mc_intra_feasible_fraction(5000, 3, swap_roles=True)

    def test_chunk_size_keeps_estimate(self):
        """Test chunked sampling estimates the same share"""
        for chunk_size in (5000, 1000):
            share, se = mc_intra_feasible_fraction(5000, 4, chunk_size=chunk_size)
            assert _within(share, se, 2.0 / 9.0)

    def test_case4_shares(self):
        """Test a half for cardinal and a quarter for diagonal callers"""
        (cardinal, cardinal_se), (diagonal, diagonal_se) = mc_case4_fractions(SAMPLES, 5)
        assert _within(cardinal, cardinal_se, 0.5)
        assert _within(diagonal, diagonal_se, 0.25)

    def test_case4_pinned_corner(self):
        """Test an origin at the far corner makes the whole zone qualify"""
        (cardinal, cardinal_se), (diagonal, diagonal_se) = mc_case4_fractions(1000, 6, pinned_corner=True)
        assert cardinal == 1.0 and diagonal == 1.0
        assert cardinal_se == 0.0 and diagonal_se == 0.0

    def test_case4_antithetic(self):
        """Test antithetic pairs agree with plain sampling and reduce the error"""
        plain = mc_case4_fractions(SAMPLES, 8)
        paired = mc_case4_fractions(SAMPLES, 8, antithetic=True)
        assert _within(paired[0][0], paired[0][1], 0.5)
        assert _within(paired[1][0], paired[1][1], 0.25)
        assert paired[0][1] <= plain[0][1]


class TestExpectedDistances:
    """Test in-zone travel distances"""

    @pytest.fixture(scope="class")
    def rows(self):
        return {row.name: row for row in mc_expected_distances(SAMPLES, 9, nearest_counts=(1, 16))}

    @pytest.mark.parametrize(
        "name,expected",
        [
            ("boundary_to_closer_of_two", 0.625),
            ("interior_to_interior", 2.0 / 3.0),
            ("boundary_to_interior", 5.0 / 6.0),
            ("nested_first_leg", 0.5),
            ("interior_to_boundary", 0.5),
        ],
    )
    def test_reference_distances(self, rows, name, expected):
        row = rows[name]
        assert row.expected == pytest.approx(expected)
        assert _within(row.estimate, row.std_error, expected)

    def test_zone_crossing_exact(self, rows):
        assert rows["zone_crossing"].estimate == pytest.approx(1.0)
        assert rows["zone_crossing"].std_error == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("count", [1, 16])
    def test_nearest_vehicle(self, rows, count):
        """Test the nearest of N vehicles scales as 0.63 / sqrt(N)"""
        row = rows[f"nearest_of_{count}"]
        assert row.estimate == pytest.approx(0.63 / np.sqrt(count), rel=0.03)


class TestRunOracles:
    """Test the full oracle table"""

    def test_rows_and_tolerance(self):
        rows = run_oracles(OracleConfig(samples=SAMPLES, nearest_counts=[4], chunk_size=10_000))
        names = [row.name for row in rows]
        assert names[:4] == [
            "intra_feasible_share",
            "intra_feasible_far_corner",
            "remote_cardinal_share",
            "remote_diagonal_share",
        ]
        assert "nearest_of_4" in names
        for row in rows:
            assert row.samples == SAMPLES
            assert row.passed(0.05), row.name

    def test_seeded(self):
        config = OracleConfig(samples=2000, nearest_counts=[1], chunk_size=1000)
        first = [row.estimate for row in run_oracles(config)]
        second = [row.estimate for row in run_oracles(config)]
        assert first == second

    @pytest.mark.slow
    def test_full_sample_tolerance(self):
        """Test every constant within 1% at a million samples"""
        config = OracleConfig()
        for row in run_oracles(config):
            assert row.passed(config.tolerance), row.name


class TestFutureEventList:
    """Test event ordering"""

    def test_time_order(self):
        events = FutureEventList()
        events.schedule(3.0, EventType.LEG_END)
        events.schedule(1.0, EventType.CALLER_ARRIVAL, origin=2)
        events.schedule(2.0, EventType.HORIZON)
        times = [events.next_event().time for _ in range(3)]
        assert times == [1.0, 2.0, 3.0]
        assert events.is_empty()
        assert events.next_event() is None

    def test_ties_in_scheduling_order(self):
        events = FutureEventList()
        events.schedule(1.0, EventType.LEG_END, vehicle=7)
        events.schedule(1.0, EventType.CALLER_ARRIVAL, origin=1)
        first, second = events.next_event(), events.next_event()
        assert first.type == EventType.LEG_END and first.payload == {"vehicle": 7}
        assert second.type == EventType.CALLER_ARRIVAL

    def test_peek_and_len(self):
        events = FutureEventList()
        assert events.peek() is None
        events.schedule(5.0, EventType.REBALANCE_DISPATCH)
        assert events.peek().time == 5.0
        assert len(events) == 1
