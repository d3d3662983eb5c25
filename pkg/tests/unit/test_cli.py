"""
Unit tests for the command-line interface
"""
import json
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from rideshare_planner import EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, cli
from src.scenario.catalog import builtin_design_data

CONFIG_DIR = str(Path(__file__).resolve().parents[2] / "config")


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def invoke(runner):
    """Run the CLI with the testing configuration"""

    def _invoke(*args):
        return runner.invoke(cli, ["--config-dir", CONFIG_DIR, "--env", "testing", *args], obj={})

    return _invoke


@pytest.fixture
def s1_files(invoke, tmp_path):
    scenario_path = tmp_path / "s1.json"
    design_path = tmp_path / "s1_design.json"
    result = invoke("scenario", "export", "s1", "--out", str(scenario_path), "--design-out", str(design_path))
    assert result.exit_code == EXIT_OK, result.output
    return scenario_path, design_path


class TestEvaluateCommand:
    """Test the evaluate command and its exit codes"""

    def test_s1_from_files(self, invoke, s1_files, tmp_path):
        """Test exported S1 files reproduce the reported fleet"""
        scenario_path, design_path = s1_files
        out = tmp_path / "report.json"
        result = invoke("evaluate", "-s", str(scenario_path), "-d", str(design_path), "--out", str(out))
        assert result.exit_code == EXIT_OK, result.output
        report = json.loads(out.read_text())
        assert report["feasible"] is True
        assert report["performance"]["total_fleet"] == pytest.approx(2401.0, rel=0.03)

    def test_builtin_names_and_csv(self, invoke, tmp_path):
        out = tmp_path / "report.json"
        result = invoke("evaluate", "-s", "s1", "-d", "s1", "--out", str(out), "--emit-csv")
        assert result.exit_code == EXIT_OK, result.output
        assert out.with_suffix(".csv").exists()

    def test_bad_fraction_row(self, invoke, tmp_path):
        """Test a path-fraction row summing to 0.9 is a usage error naming the pair"""
        data = builtin_design_data("s1")
        data["delta"]["2->3:1"] = 0.44
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        result = invoke("evaluate", "-s", "s1", "-d", str(path))
        assert result.exit_code == EXIT_USAGE
        assert "2->3" in result.output

    def test_missing_scenario(self, invoke):
        result = invoke("evaluate", "-s", "no_such_file.json", "-d", "s1")
        assert result.exit_code == EXIT_USAGE

    def test_infeasible_design(self, invoke, tmp_path):
        """Test a fleet without idle vehicles exits 2 and still writes a report"""
        data = builtin_design_data("s1")
        data["n_idle"] = [0, 0, 0, 0]
        path = tmp_path / "empty.json"
        path.write_text(json.dumps(data))
        out = tmp_path / "report.json"
        result = invoke("evaluate", "-s", "s1", "-d", str(path), "--out", str(out))
        assert result.exit_code == EXIT_INFEASIBLE
        assert json.loads(out.read_text())["feasible"] is False


class TestRebalanceCommand:
    """Test the transportation command"""

    def test_diagonal_move(self, invoke, tmp_path):
        out = tmp_path / "plan.json"
        result = invoke("rebalance", "-s", "s1", "--rho", "10,0,0,-10", "--out", str(out))
        assert result.exit_code == EXIT_OK, result.output
        assert json.loads(out.read_text())["rebalancing"]["flows"] == {"1->4": 10.0}

    def test_rho_file(self, invoke, tmp_path):
        path = tmp_path / "rho.json"
        path.write_text(json.dumps({"rho": [5.0, -5.0, 0.0, 0.0]}))
        out = tmp_path / "plan.json"
        result = invoke("rebalance", "-s", "s1", "--rho", str(path), "--out", str(out))
        assert result.exit_code == EXIT_OK, result.output
        assert json.loads(out.read_text())["rebalancing"]["flows"] == {"1->2": 5.0}

    def test_wrong_length(self, invoke):
        result = invoke("rebalance", "-s", "s1", "--rho", "1,-1")
        assert result.exit_code == EXIT_USAGE

    def test_not_numbers(self, invoke):
        result = invoke("rebalance", "-s", "s1", "--rho", "a,b,c,d")
        assert result.exit_code == EXIT_USAGE

    def test_unbalanced(self, invoke):
        """Test rates that do not sum to zero are infeasible"""
        result = invoke("rebalance", "-s", "s1", "--rho", "10,0,0,-5")
        assert result.exit_code == EXIT_INFEASIBLE


class TestOracleCommand:
    """Test the geometry constants command"""

    def test_loose_tolerance_passes(self, invoke):
        result = invoke("oracle", "--samples", "2000", "--tolerance", "0.5", "-o", "csv")
        assert result.exit_code == EXIT_OK, result.output
        assert "intra_feasible_share" in result.output
        assert "FAIL" not in result.output

    def test_tight_tolerance_fails(self, invoke):
        result = invoke("oracle", "--samples", "2000", "--tolerance", "1e-9", "-o", "csv")
        assert result.exit_code == EXIT_INFEASIBLE


class TestScenarioCommands:
    """Test the built-in scenario helpers"""

    def test_list(self, invoke):
        result = invoke("scenario", "list")
        assert result.exit_code == EXIT_OK
        assert "benchmark" in result.output

    def test_export_unknown(self, invoke, tmp_path):
        result = invoke("scenario", "export", "nowhere", "--out", str(tmp_path / "x.json"))
        assert result.exit_code == EXIT_USAGE

    def test_synthetic_trips_ingest_back(self, invoke, tmp_path):
        """Test synthetic trips ingest back to the scenario demand"""
        trips = tmp_path / "trips.csv"
        result = invoke("scenario", "synth-trips", "-s", "s1", "--window", "07:00-07:30", "--out", str(trips))
        assert result.exit_code == EXIT_OK, result.output

        out = tmp_path / "ingested.json"
        result = invoke(
            "ingest", "--trips", str(trips), "--grid-scenario", "s1",
            "--window", "07:00-07:30", "--name", "s1_again", "--out", str(out),
        )
        assert result.exit_code == EXIT_OK, result.output
        data = json.loads(out.read_text())
        assert data["name"] == "s1_again"
        assert sum(map(sum, data["demand"])) == pytest.approx(8000.0, rel=0.01)


class TestConfigCommands:
    """Test configuration commands"""

    def test_validate(self, invoke):
        result = invoke("config", "validate")
        assert result.exit_code == EXIT_OK, result.output

    def test_validate_errors(self, runner, tmp_path):
        (tmp_path / "base.yaml").write_text(yaml.safe_dump({"optimizer": {"multistarts": 0}}))
        result = runner.invoke(cli, ["--config-dir", str(tmp_path), "--env", "testing", "config", "validate"], obj={})
        assert result.exit_code == EXIT_USAGE
        assert "multistarts" in result.output

    def test_show_json(self, invoke):
        result = invoke("config", "show", "-o", "json")
        assert result.exit_code == EXIT_OK, result.output
        assert '"testing"' in result.output

    def test_show_table(self, invoke):
        result = invoke("config", "show")
        assert result.exit_code == EXIT_OK, result.output
        assert "testing" in result.output
        assert "optimizer" in result.output


class TestGroup:
    """Test group-level behaviour"""

    def test_version(self, runner):
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == EXIT_OK

    def test_unknown_command(self, invoke):
        assert invoke("teleport").exit_code == EXIT_USAGE

    @pytest.mark.slow
    def test_optimize_writes_design(self, invoke, tmp_path):
        """Test a short search writes a design that evaluates cleanly"""
        out = tmp_path / "best.json"
        design_out = tmp_path / "design.json"
        result = invoke(
            "optimize", "-s", "s1", "--seed", "0", "--multistarts", "1", "--max-iters", "3",
            "--out", str(out), "--design-out", str(design_out),
        )
        assert result.exit_code == EXIT_OK, result.output
        assert json.loads(out.read_text())["meta"]["command"] == "optimize"
        assert invoke("evaluate", "-s", "s1", "-d", str(design_out)).exit_code == EXIT_OK
