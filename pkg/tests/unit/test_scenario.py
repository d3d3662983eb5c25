"""
Unit tests for scenario loading, built-in catalog and trip ingestion
"""
import json
import random
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np
import pytest

from src.exceptions import IngestionError, ScenarioLoadError
from src.geometry.zone_grid import ZoneGrid
from src.models.scenario_models import TripRecord
from src.network.design import load_design
from src.scenario.catalog import (
    builtin_design,
    builtin_design_names,
    builtin_scenario,
    builtin_scenario_data,
    builtin_scenario_names,
)
from src.scenario.ingest import (
    TimeWindow,
    ingest_trip_summary,
    ingest_trips,
    read_trips_csv,
    synthetic_trip_stream,
    write_trips_csv,
)
from src.scenario.loader import (
    default_vehicle_cost,
    homogeneous_scenario,
    load_scenario,
    parse_scenario,
    save_scenario,
)

DATA_DIR = Path(__file__).resolve().parents[2] / "data"


@pytest.fixture
def s1_data():
    """Scenario dictionary of the first hypothetical scenario"""
    return builtin_scenario_data("s1")


@pytest.fixture
def scenario_file(tmp_path, s1_data):
    path = tmp_path / "s1.json"
    path.write_text(json.dumps(s1_data))
    return path


class TestScenarioLoader:
    """Test scenario file parsing and validation"""

    def test_load_s1(self, scenario_file):
        """Test the four-zone scenario loads with its total demand"""
        scenario = load_scenario(scenario_file)
        assert scenario.size == 4
        assert scenario.phi == 5.0
        assert scenario.speed == 25.0
        assert scenario.value_of_time == 20.0
        assert scenario.vehicle_cost == pytest.approx(52.0)
        assert scenario.total_demand == pytest.approx(8000.0)

    def test_demand_scale_applied(self, s1_data):
        """Test demand is multiplied by demand_scale at load"""
        s1_data["demand_scale"] = 2.0
        scenario = parse_scenario(s1_data)
        assert scenario.total_demand == pytest.approx(16000.0)
        assert scenario.base_demand.sum() == pytest.approx(8000.0)

    def test_scaling_commutes(self, s1_data):
        """Test loading with q=2 equals q=1 times two"""
        base = parse_scenario(s1_data)
        s1_data["demand_scale"] = 2.0
        scaled = parse_scenario(s1_data)
        np.testing.assert_allclose(scaled.demand, 2.0 * base.demand)
        np.testing.assert_allclose(base.with_demand_scale(2.0).demand, scaled.demand)

    def test_chicago_scaled(self):
        """Test the nine-zone case doubles to 19040"""
        data = builtin_scenario_data("chicago3x3")
        data["demand_scale"] = 2
        assert parse_scenario(data).total_demand == pytest.approx(19040.0)

    def test_negative_rate_rejected(self, s1_data):
        """Test a negative trip rate names the demand field"""
        s1_data["demand"][0][0] = -1.0
        with pytest.raises(ScenarioLoadError) as exc_info:
            parse_scenario(s1_data)
        assert exc_info.value.field_name == "demand"

    def test_non_square_demand_rejected(self, s1_data):
        """Test the demand matrix must be square"""
        s1_data["demand"] = s1_data["demand"][:3]
        with pytest.raises(ScenarioLoadError):
            parse_scenario(s1_data)

    def test_demand_size_must_match_grid(self, s1_data):
        """Test a 3x3 matrix on a four-zone grid"""
        s1_data["demand"] = [[1.0] * 3 for _ in range(3)]
        with pytest.raises(ScenarioLoadError, match="4x4"):
            parse_scenario(s1_data)

    def test_holey_grid_rejected(self, s1_data):
        """Test grid errors surface as load errors on the grid field"""
        s1_data["grid"] = {"rows": 3, "cols": 3, "mask": [[1, 1, 1], [1, 0, 1], [1, 1, 1]]}
        s1_data["demand"] = [[1.0] * 8 for _ in range(8)]
        with pytest.raises(ScenarioLoadError) as exc_info:
            parse_scenario(s1_data)
        assert exc_info.value.field_name == "grid"

    def test_missing_file(self, tmp_path):
        """Test a missing scenario file"""
        with pytest.raises(ScenarioLoadError, match="not found"):
            load_scenario(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        """Test malformed JSON"""
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ScenarioLoadError, match="invalid JSON"):
            load_scenario(path)

    def test_default_vehicle_cost(self, s1_data):
        """Test gamma = 40 + 0.48 v when omitted"""
        del s1_data["vehicle_cost"]
        assert parse_scenario(s1_data).vehicle_cost == pytest.approx(default_vehicle_cost(25.0))
        assert default_vehicle_cost(25.0) == pytest.approx(52.0)

    def test_save_round_trip(self, tmp_path, s1_data):
        """Test a saved scenario loads back with the same digest"""
        s1_data["demand_scale"] = 1.5
        scenario = parse_scenario(s1_data)
        path = tmp_path / "out" / "scenario.json"
        save_scenario(scenario, path)
        again = load_scenario(path)
        assert again.digest() == scenario.digest()
        np.testing.assert_allclose(again.demand, scenario.demand)

    def test_with_value_of_time(self, s1_data):
        """Test changing beta keeps demand"""
        scenario = parse_scenario(s1_data).with_value_of_time(30.0)
        assert scenario.value_of_time == 30.0
        assert scenario.total_demand == pytest.approx(8000.0)

    def test_demand_is_read_only(self, s1_data):
        """Test the demand matrix cannot be mutated"""
        scenario = parse_scenario(s1_data)
        with pytest.raises(ValueError):
            scenario.demand[0, 0] = 1.0


class TestHomogeneousScenario:
    """Test the uniform-demand constructor"""

    def test_four_zone(self, grid_2x2):
        """Test 8000 trips over 16 pairs"""
        scenario = homogeneous_scenario(grid_2x2, 8000.0)
        assert np.all(scenario.demand == 500.0)

    def test_single_zone(self):
        """Test all demand stays in the one zone"""
        scenario = homogeneous_scenario(ZoneGrid.from_layout(1, 1, 1.0), 100.0)
        assert scenario.demand[0, 0] == 100.0

    def test_nine_zone(self):
        """Test 9000 trips over 81 pairs"""
        scenario = homogeneous_scenario(ZoneGrid.from_layout(3, 3, 1.0), 9000.0)
        np.testing.assert_allclose(scenario.demand, 9000.0 / 81.0)

    def test_non_positive_total(self, grid_2x2):
        """Test the total rate must be positive"""
        with pytest.raises(ValueError):
            homogeneous_scenario(grid_2x2, 0.0)


class TestCatalog:
    """Test built-in scenarios and designs"""

    @pytest.mark.parametrize("name", ["s1", "s2", "s3", "benchmark"])
    def test_four_zone_totals(self, name):
        """Test every hypothetical scenario totals 8000 trips per hour"""
        scenario = builtin_scenario(name)
        assert scenario.total_demand == pytest.approx(8000.0)
        assert scenario.phi == 5.0
        assert scenario.vehicle_cost == pytest.approx(52.0)

    def test_benchmark_uniform(self):
        """Test the benchmark has 500 trips per pair"""
        assert np.all(builtin_scenario("benchmark").demand == 500.0)

    def test_chicago_case(self):
        """Test the nine-zone downtown matrix"""
        scenario = builtin_scenario("chicago3x3")
        assert scenario.size == 9
        assert scenario.phi == 4.0
        assert scenario.total_demand == pytest.approx(9520.0)
        assert scenario.demand[:, 2].sum() == pytest.approx(6196.0)
        assert scenario.demand[:, 3].sum() == pytest.approx(64.0)

    def test_names(self):
        """Test listing of built-ins"""
        assert set(builtin_scenario_names()) == {"s1", "s2", "s3", "benchmark", "chicago3x3"}
        assert set(builtin_design_names()) >= {"s1", "s2", "s3", "benchmark"}

    def test_unknown_name(self):
        """Test unknown names raise KeyError"""
        with pytest.raises(KeyError):
            builtin_scenario("nowhere")
        with pytest.raises(KeyError):
            builtin_design("nowhere")

    @pytest.mark.parametrize("name", ["s1", "s2", "s3", "benchmark"])
    def test_designs_valid(self, name, grid_2x2):
        """Test built-in designs satisfy the path-fraction constraints"""
        design = builtin_design(name)
        design.validate(grid_2x2)
        assert design.n_idle.shape == (4,)

    def test_s1_design_values(self):
        """Test the reported idle counts of the first scenario"""
        design = builtin_design("s1")
        np.testing.assert_allclose(design.n_idle, [6, 9, 32, 6])
        assert design.fraction(2, 3, 1) == pytest.approx(0.54)
        assert design.fraction(4, 1, 2) == pytest.approx(1.0)

    @pytest.mark.parametrize("name", ["s1", "s2", "s3", "benchmark", "chicago3x3"])
    def test_shipped_scenario_files(self, name):
        """Test the files under data/scenarios match the built-ins"""
        loaded = load_scenario(DATA_DIR / "scenarios" / f"{name}.json")
        builtin = builtin_scenario(name)
        assert loaded.name == name
        assert loaded.grid.zone_ids == builtin.grid.zone_ids
        assert loaded.phi == builtin.phi
        assert loaded.vehicle_cost == pytest.approx(builtin.vehicle_cost)
        np.testing.assert_allclose(loaded.demand, builtin.demand)

    @pytest.mark.parametrize("name", ["s1", "s2", "s3", "benchmark"])
    def test_shipped_design_files(self, name):
        grid = builtin_scenario(name).grid
        loaded = load_design(DATA_DIR / "designs" / f"{name}.json", grid)
        assert loaded.digest() == builtin_design(name, grid).digest()


def _trip(pickup_zone, dropoff_zone, when):
    return {"pickup_zone": pickup_zone, "dropoff_zone": dropoff_zone, "timestamp": when}


class TestTimeWindow:
    """Test daily window parsing"""

    def test_parse(self):
        window = TimeWindow.parse("07:00-09:00")
        assert window.hours == 2.0
        assert str(window) == "07:00-09:00"

    def test_bad_text(self):
        with pytest.raises(ValueError):
            TimeWindow.parse("seven to nine")

    def test_empty_window(self):
        with pytest.raises(ValueError):
            TimeWindow.parse("09:00-09:00")


class TestIngestion:
    """Test aggregation of trip records into hourly rates"""

    def test_two_records_two_hours(self, grid_2x2):
        """Test 2 trips over one day of a 2-hour window give 1 trip/hr"""
        records = [
            _trip(1, 4, datetime(2019, 1, 7, 7, 15)),
            _trip(1, 4, datetime(2019, 1, 7, 8, 45)),
        ]
        demand = ingest_trips(records, grid_2x2, TimeWindow.parse("07:00-09:00"), days=1)
        assert demand[0, 3] == pytest.approx(1.0)
        assert demand.sum() == pytest.approx(1.0)

    def test_drops_are_counted(self, grid_2x2):
        """Test records outside the window, the grid, or the schema"""
        records = [
            _trip(1, 2, datetime(2019, 1, 7, 7, 30)),
            _trip(1, 2, datetime(2019, 1, 7, 10, 0)),
            {"pickup_x": 50.0, "pickup_y": 50.0, "dropoff_zone": 2, "timestamp": datetime(2019, 1, 7, 7, 30)},
            {"pickup_zone": 1, "timestamp": datetime(2019, 1, 7, 7, 30)},
        ]
        summary = ingest_trip_summary(records, grid_2x2, TimeWindow.parse("07:00-09:00"), days=1)
        assert summary.records == 4
        assert summary.used == 1
        assert summary.outside_window == 1
        assert summary.outside_grid == 1
        assert summary.invalid == 1
        assert summary.dropped == 3

    def test_coordinates_located(self, grid_2x2):
        """Test points are assigned to zones by coordinates"""
        records = [
            {"pickup_x": 1.0, "pickup_y": 1.0, "dropoff_x": 9.0, "dropoff_y": 9.0, "timestamp": datetime(2019, 1, 7, 8)},
        ]
        demand = ingest_trips(records, grid_2x2, TimeWindow.parse("07:00-09:00"), days=1)
        assert demand[2, 1] == pytest.approx(0.5)

    def test_all_dropped(self, grid_2x2):
        """Test an ingestion error when nothing survives"""
        records = [_trip(1, 2, datetime(2019, 1, 7, 12, 0))]
        with pytest.raises(IngestionError):
            ingest_trips(records, grid_2x2, TimeWindow.parse("07:00-09:00"), days=1)

    def test_invalid_days(self, grid_2x2):
        with pytest.raises(ValueError):
            ingest_trips([], grid_2x2, TimeWindow.parse("07:00-09:00"), days=0)

    def test_additive(self, grid_2x2):
        """Test ingesting two streams separately sums to ingesting both"""
        window = TimeWindow.parse("07:00-09:00")
        first = [_trip(1, 2, datetime(2019, 1, 7, 7, m)) for m in range(0, 50, 10)]
        second = [_trip(3, 4, datetime(2019, 1, 8, 8, m)) for m in range(0, 30, 10)]
        combined = ingest_trips(first + second, grid_2x2, window, days=2)
        separate = ingest_trips(first, grid_2x2, window, days=2) + ingest_trips(second, grid_2x2, window, days=2)
        np.testing.assert_allclose(combined, separate)

    def test_matches_naive_count(self, grid_2x2):
        """Test a random stream against a direct recount"""
        rng = random.Random(11)
        window = TimeWindow.parse("07:00-09:00")
        start = datetime(2019, 1, 7, 6, 0)
        records = []
        expected = np.zeros((4, 4))
        for _ in range(10_000):
            i, j = rng.randint(1, 4), rng.randint(1, 4)
            day = rng.randint(0, 2)
            when = start + timedelta(days=day, seconds=rng.uniform(0, 4 * 3600))
            records.append(_trip(i, j, when))
            if 7 <= when.hour < 9:
                expected[i - 1, j - 1] += 1
        expected /= window.hours * 3
        np.testing.assert_allclose(ingest_trips(records, grid_2x2, window, days=3), expected)

    def test_synthetic_chicago_stream(self):
        """Test the synthetic downtown stream ingests back to 9520 trips/hr"""
        scenario = builtin_scenario("chicago3x3")
        window = TimeWindow.parse("07:00-09:00")
        records = synthetic_trip_stream(scenario.grid, scenario.demand, window, days=1, seed=3)
        demand = ingest_trips(records, scenario.grid, window, days=1)
        assert demand.sum() == pytest.approx(9520.0)
        np.testing.assert_allclose(demand, scenario.demand)

    def test_csv_round_trip(self, tmp_path, grid_2x2):
        """Test written trips read back and ingest identically"""
        window = TimeWindow.parse("07:00-09:00")
        demand = np.array([[2.0, 1.0, 0.0, 0.5], [0.0, 1.0, 0.0, 0.0], [0.5, 0.0, 0.0, 0.0], [0.0, 0.0, 1.5, 0.0]])
        records = synthetic_trip_stream(grid_2x2, demand, window, days=2, seed=1)
        path = tmp_path / "trips.csv"
        assert write_trips_csv(records, path) == len(records)
        from_csv = ingest_trips(read_trips_csv(path), grid_2x2, window, days=2)
        np.testing.assert_allclose(from_csv, ingest_trips(records, grid_2x2, window, days=2))

    def test_csv_without_timestamp(self, tmp_path):
        path = tmp_path / "trips.csv"
        path.write_text("pickup_zone,dropoff_zone\n1,2\n")
        with pytest.raises(IngestionError, match="timestamp"):
            list(read_trips_csv(path))

    def test_trip_record_needs_location(self):
        """Test a record must locate both ends"""
        with pytest.raises(ValueError):
            TripRecord(pickup_zone=1, timestamp=datetime(2019, 1, 7, 8))
