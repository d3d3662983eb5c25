"""
Unit tests for configuration loading and validation
"""
import json
import logging
import logging.handlers

import pytest
import yaml

from src.config import config_manager
from src.config.config_manager import (
    Config,
    ConfigManager,
    Environment,
    LoggingConfig,
    get_config_manager,
    reset_config_manager,
    setup_logging,
)
from src.config.validation import ConfigValidator, validate_config


@pytest.fixture
def config_dir(tmp_path):
    """Config tree with a base file and a testing overlay"""
    (tmp_path / "environments").mkdir()
    base = {
        "debug": False,
        "solver": {"tolerance": 1e-10, "max_iterations": 40},
        "optimizer": {"multistarts": 8, "seed": 0},
        "oracle": {"samples": 1000000},
    }
    overlay = {"optimizer": {"multistarts": 2}, "oracle": {"samples": 20000}}
    (tmp_path / "base.yaml").write_text(yaml.safe_dump(base))
    (tmp_path / "environments" / "testing.yaml").write_text(yaml.safe_dump(overlay))
    return tmp_path


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ("RIDESHARE_ENV", "RIDESHARE_LOG", "RIDESHARE_SEED", "RIDESHARE_WORKERS",
                 "RIDESHARE_CACHE_ENTRIES", "RIDESHARE_DEBUG"):
        monkeypatch.delenv(name, raising=False)
    reset_config_manager()
    yield
    reset_config_manager()


class TestConfigManager:
    """Test layered configuration loading"""

    def test_environment_overlay(self, config_dir):
        """Test the environment file overrides the base file"""
        manager = ConfigManager(str(config_dir), "testing")
        assert manager.environment == Environment.TESTING
        assert manager.config.optimizer.multistarts == 2
        assert manager.config.optimizer.seed == 0
        assert manager.config.solver.max_iterations == 40
        assert manager.config.oracle.samples == 20000

    def test_local_overrides(self, config_dir):
        (config_dir / "local.yaml").write_text(yaml.safe_dump({"solver": {"max_iterations": 7}}))
        manager = ConfigManager(str(config_dir), "testing")
        assert manager.config.solver.max_iterations == 7

    def test_missing_files_use_defaults(self, tmp_path):
        manager = ConfigManager(str(tmp_path), "development")
        assert manager.config.solver.tolerance == 1e-10
        assert manager.config.cache.max_entries == 512

    def test_env_overrides(self, config_dir, monkeypatch):
        """Test seed and worker variables reach both the optimizer and the simulator"""
        monkeypatch.setenv("RIDESHARE_SEED", "42")
        monkeypatch.setenv("RIDESHARE_WORKERS", "3")
        monkeypatch.setenv("RIDESHARE_DEBUG", "true")
        manager = ConfigManager(str(config_dir), "testing")
        assert manager.config.optimizer.seed == 42
        assert manager.config.simulation.seed == 42
        assert manager.config.simulation.workers == 3
        assert manager.config.debug is True

    def test_environment_from_variable(self, config_dir, monkeypatch):
        monkeypatch.setenv("RIDESHARE_ENV", "Testing")
        assert ConfigManager(str(config_dir)).environment == Environment.TESTING

    def test_unknown_keys_ignored(self, config_dir, caplog):
        (config_dir / "local.yaml").write_text(yaml.safe_dump({"solver": {"damping": 0.5}}))
        with caplog.at_level(logging.WARNING):
            manager = ConfigManager(str(config_dir), "testing")
        assert not hasattr(manager.config.solver, "damping")
        assert "damping" in caplog.text

    def test_malformed_yaml(self, config_dir):
        (config_dir / "local.yaml").write_text("solver: [unclosed")
        manager = ConfigManager(str(config_dir), "testing")
        assert manager.config.solver.max_iterations == 40

    def test_get_and_set(self, config_dir):
        """Test dot-notation access"""
        manager = ConfigManager(str(config_dir), "testing")
        assert manager.get("optimizer.multistarts") == 2
        assert manager.get("optimizer.missing", "fallback") == "fallback"
        assert manager.set("simulation.horizon", 50.0)
        assert manager.get("simulation.horizon") == 50.0
        assert not manager.set("nothing.here", 1)

    def test_reload(self, config_dir):
        manager = ConfigManager(str(config_dir), "testing")
        manager.set("optimizer.multistarts", 99)
        manager.reload()
        assert manager.config.optimizer.multistarts == 2

    def test_to_dict(self, config_dir):
        data = ConfigManager(str(config_dir), "testing").to_dict()
        assert data["environment"] == "testing"
        assert data["oracle"]["nearest_counts"] == [1, 4, 16]

    def test_to_dict_enum_values(self, config_dir):
        data = ConfigManager(str(config_dir), "production").to_dict()
        assert data["environment"] == "production"
        assert not isinstance(data["environment"], Environment)
        assert json.loads(json.dumps(data)) == data

    def test_global_manager(self, config_dir):
        first = get_config_manager(str(config_dir), "testing")
        assert get_config_manager() is first
        reset_config_manager()
        assert config_manager._config_manager is None

    def test_env_value_conversion(self, config_dir):
        manager = ConfigManager(str(config_dir), "testing")
        assert manager._convert_env_value("off") is False
        assert manager._convert_env_value("12") == 12
        assert manager._convert_env_value("1e-3") == pytest.approx(1e-3)
        assert manager._convert_env_value("[1, 2]") == [1, 2]
        assert manager._convert_env_value("DEBUG") == "DEBUG"


class TestConfigValidator:
    """Test configuration checks"""

    def test_defaults_valid(self):
        result = validate_config(Config())
        assert result["valid"]
        assert result["error_count"] == 0

    def test_errors_collected(self):
        config = Config()
        config.logging.level = "LOUD"
        config.optimizer.multistarts = 0
        config.simulation.warmup = 500.0
        errors, _ = ConfigValidator(config).validate_all()
        assert "Invalid log level: LOUD" in errors
        assert "Optimizer multistarts must be at least 1" in errors
        assert any("warmup" in e for e in errors)

    def test_small_oracle_warns(self):
        config = Config()
        config.oracle.samples = 1000
        errors, warnings = ConfigValidator(config).validate_all()
        assert not errors
        assert any("below 1e5" in w for w in warnings)

    def test_production_debug_warns(self):
        config = Config(environment=Environment.PRODUCTION, debug=True)
        _, warnings = ConfigValidator(config).validate_all()
        assert "Debug mode is enabled in production" in warnings

    def test_manager_validate(self, config_dir):
        manager = ConfigManager(str(config_dir), "testing")
        manager.set("solver.fd_step", 0.5)
        assert any("fd_step" in e for e in manager.validate())


class TestSetupLogging:
    """Test logging handlers"""

    def test_console_and_file(self, tmp_path):
        log_file = tmp_path / "logs" / "planner.log"
        setup_logging(LoggingConfig(level="WARNING", file_enabled=True, file_path=str(log_file)))
        root = logging.getLogger()
        assert root.level == logging.WARNING
        assert any(isinstance(h, logging.handlers.RotatingFileHandler) for h in root.handlers)
        assert log_file.parent.exists()
        for handler in list(root.handlers):
            handler.close()
            root.removeHandler(handler)

    def test_verbose_forces_debug(self):
        setup_logging(LoggingConfig(level="ERROR", console_enabled=False), verbose=True)
        assert logging.getLogger().level == logging.DEBUG
