"""
Configuration Manager
Centralized configuration loading for the solver, optimizer, simulator and reporting layers
"""
import os
import re
import yaml
import json
import logging
import logging.handlers
from typing import Dict, Any, Optional, List
from pathlib import Path
from dataclasses import dataclass, field, fields
from enum import Enum
from dotenv import load_dotenv
from rich.logging import RichHandler


class Environment(str, Enum):
    """Environment types"""
    DEVELOPMENT = "development"
    TESTING = "testing"
    PRODUCTION = "production"


@dataclass
class LoggingConfig:
    """Logging configuration"""
    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file_enabled: bool = False
    file_path: str = "logs/rideshare_planner.log"
    file_max_size: str = "10MB"
    file_backup_count: int = 5
    console_enabled: bool = True


@dataclass
class SolverConfig:
    """Steady-state solve settings"""
    tolerance: float = 1e-10            # flow residual, relative to 1 + max demand
    count_tolerance: float = 1e-9       # count residual, relative to 1 + max count
    max_iterations: int = 60
    guess_budget: int = 5
    negative_tolerance: float = 1e-9
    fd_step: float = 1e-7
    max_backtracks: int = 30
    conservation_tolerance: float = 1e-8
    probe_uniqueness: bool = False
    uniqueness_tolerance: float = 1e-6


@dataclass
class OptimizerConfig:
    """Multistart projected-gradient search settings"""
    multistarts: int = 8
    max_iters: int = 60
    grad_step: float = 1e-4
    grad_floor: float = 1e-5
    no_improve_patience: int = 5
    infeasible_penalty: float = 1e4
    seed: int = 0
    idle_upper_factor: float = 10.0
    idle_upper: Optional[List[float]] = None
    initial_step: float = 0.1
    max_halvings: int = 12
    min_improvement: float = 1e-7
    max_resamples: int = 20
    workers: int = 1


@dataclass
class SimulationConfig:
    """Discrete-event simulation settings"""
    horizon: float = 200.0
    warmup: Optional[float] = None      # None: ten mean trip times
    seed: int = 0
    replications: int = 1
    workers: int = 1
    starvation_queue: int = 50
    diagnostic_tolerance: float = 0.2
    event_log: Optional[str] = None


@dataclass
class OracleConfig:
    """Monte-Carlo geometry oracle settings"""
    samples: int = 1_000_000
    seed: int = 7
    tolerance: float = 0.01
    chunk_size: int = 250_000
    nearest_counts: List[int] = field(default_factory=lambda: [1, 4, 16])


@dataclass
class RebalanceConfig:
    """Transportation problem settings"""
    balance_tolerance: float = 1e-6
    netting_tolerance: float = 1e-9
    tie_break: bool = True


@dataclass
class CacheConfig:
    """Evaluation and solve-guess cache"""
    enabled: bool = True
    max_entries: int = 512
    guess_neighbors: int = 2


@dataclass
class ReportingConfig:
    """Report file settings"""
    significant_digits: int = 12
    output_dir: str = "results"
    emit_csv: bool = False


@dataclass
class ScenarioDefaults:
    """Values used when a scenario file leaves them out"""
    speed_kmh: float = 25.0
    value_of_time: float = 20.0
    driver_wage: float = 40.0
    vehicle_cost_per_km: float = 0.48


@dataclass
class Config:
    """Main configuration class"""
    environment: Environment = Environment.DEVELOPMENT
    debug: bool = False

    logging: LoggingConfig = field(default_factory=LoggingConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    rebalance: RebalanceConfig = field(default_factory=RebalanceConfig)
    cache: CacheConfig = field(default_factory=CacheConfig)
    reporting: ReportingConfig = field(default_factory=ReportingConfig)
    scenario: ScenarioDefaults = field(default_factory=ScenarioDefaults)


_SECTIONS = {
    "logging": LoggingConfig,
    "solver": SolverConfig,
    "optimizer": OptimizerConfig,
    "simulation": SimulationConfig,
    "oracle": OracleConfig,
    "rebalance": RebalanceConfig,
    "cache": CacheConfig,
    "reporting": ReportingConfig,
    "scenario": ScenarioDefaults,
}

_ENV_MAPPINGS = {
    "RIDESHARE_LOG": [("logging", "level")],
    "RIDESHARE_SEED": [("optimizer", "seed"), ("simulation", "seed")],
    "RIDESHARE_WORKERS": [("optimizer", "workers"), ("simulation", "workers")],
    "RIDESHARE_CACHE_ENTRIES": [("cache", "max_entries")],
    "RIDESHARE_DEBUG": [("debug",)],
}


class ConfigManager:
    """Central configuration manager"""

    def __init__(self, config_dir: Optional[str] = None, environment: Optional[str] = None):
        self.logger = logging.getLogger(__name__)

        if config_dir:
            self.config_dir = Path(config_dir)
        else:
            self.config_dir = Path(__file__).parent.parent.parent / "config"

        load_dotenv()

        self.environment = Environment(
            (environment or os.getenv("RIDESHARE_ENV", "development")).lower()
        )

        self._config: Optional[Config] = None
        self._load_config()

    def _load_config(self):
        """Load configuration from files and environment variables"""
        config_data: Dict[str, Any] = {}

        base_config_path = self.config_dir / "base.yaml"
        if base_config_path.exists():
            config_data.update(self._load_yaml_file(base_config_path))

        env_config_path = self.config_dir / "environments" / f"{self.environment.value}.yaml"
        if env_config_path.exists():
            config_data = self._deep_merge(config_data, self._load_yaml_file(env_config_path))

        # untracked local overrides
        local_config_path = self.config_dir / "local.yaml"
        if local_config_path.exists():
            config_data = self._deep_merge(config_data, self._load_yaml_file(local_config_path))

        config_data = self._apply_env_overrides(config_data)
        self._config = self._create_config_object(config_data)
        self.logger.debug(f"Configuration loaded for environment: {self.environment.value}")

    def _load_yaml_file(self, file_path: Path) -> Dict[str, Any]:
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                return yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            self.logger.warning(f"Failed to load config file {file_path}: {e}")
            return {}

    def _deep_merge(self, base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
        result = base.copy()
        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value
        return result

    def _apply_env_overrides(self, config_data: Dict[str, Any]) -> Dict[str, Any]:
        for env_var, config_paths in _ENV_MAPPINGS.items():
            value = os.getenv(env_var)
            if value is None:
                continue
            value = self._convert_env_value(value)
            for config_path in config_paths:
                current = config_data
                for key in config_path[:-1]:
                    current = current.setdefault(key, {})
                current[config_path[-1]] = value
        return config_data

    def _convert_env_value(self, value: str) -> Any:
        """Convert environment variable string to appropriate type"""
        if value.lower() in ("true", "yes", "on"):
            return True
        if value.lower() in ("false", "no", "off"):
            return False

        if re.fullmatch(r"-?\d+", value):
            return int(value)

        try:
            if "." in value or "e" in value.lower():
                return float(value)
        except ValueError:
            pass

        if value.startswith("{") or value.startswith("["):
            try:
                return json.loads(value)
            except json.JSONDecodeError:
                pass

        return value

    def _build_section(self, name: str, data: Dict[str, Any]):
        section_cls = _SECTIONS[name]
        known = {f.name for f in fields(section_cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            self.logger.warning(f"Ignoring unknown {name} settings: {', '.join(unknown)}")
        return section_cls(**{k: v for k, v in data.items() if k in known})

    def _create_config_object(self, config_data: Dict[str, Any]) -> Config:
        try:
            sections = {
                name: self._build_section(name, config_data.get(name) or {})
                for name in _SECTIONS
            }
            return Config(
                environment=self.environment,
                debug=bool(config_data.get("debug", False)),
                **sections,
            )
        except TypeError as e:
            self.logger.error(f"Failed to create config object: {e}")
            return Config(environment=self.environment)

    @property
    def config(self) -> Config:
        if self._config is None:
            self._load_config()
        return self._config

    def reload(self):
        self._load_config()
        self.logger.info("Configuration reloaded")

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by key (supports dot notation)"""
        value: Any = self.config
        for k in key.split("."):
            if hasattr(value, k):
                value = getattr(value, k)
            elif isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> bool:
        """Set configuration value by key (supports dot notation)"""
        keys = key.split(".")
        target: Any = self.config
        for k in keys[:-1]:
            if hasattr(target, k):
                target = getattr(target, k)
            else:
                return False
        if not hasattr(target, keys[-1]):
            return False
        setattr(target, keys[-1], value)
        return True

    def validate(self) -> List[str]:
        """Errors reported by ConfigValidator"""
        from .validation import ConfigValidator

        errors, _ = ConfigValidator(self.config).validate_all()
        return errors

    def to_dict(self) -> Dict[str, Any]:
        def _convert_to_dict(obj):
            if isinstance(obj, Enum):
                return obj.value
            if isinstance(obj, dict):
                return {k: _convert_to_dict(v) for k, v in obj.items()}
            if isinstance(obj, (list, tuple)):
                return [_convert_to_dict(item) for item in obj]
            if hasattr(obj, "__dict__"):
                return {key: _convert_to_dict(value) for key, value in obj.__dict__.items()}
            return obj

        return _convert_to_dict(self.config)


def _parse_size(size: str) -> int:
    """'10MB' -> bytes"""
    match = re.fullmatch(r"\s*(\d+)\s*([KMG]?B)?\s*", str(size).upper())
    if not match:
        return 10 * 1024 * 1024
    number, unit = int(match.group(1)), match.group(2) or "B"
    return number * {"B": 1, "KB": 1024, "MB": 1024 ** 2, "GB": 1024 ** 3}[unit]


def setup_logging(logging_config: LoggingConfig, verbose: bool = False):
    """Rich console handler plus an optional rotating file handler on the root logger"""
    level_name = "DEBUG" if verbose else os.getenv("RIDESHARE_LOG", logging_config.level)
    level = getattr(logging, str(level_name).upper(), logging.INFO)

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    root.setLevel(level)

    if logging_config.console_enabled:
        console = RichHandler(rich_tracebacks=True, show_path=False)
        console.setLevel(level)
        root.addHandler(console)

    if logging_config.file_enabled:
        log_path = Path(logging_config.file_path)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_path,
            maxBytes=_parse_size(logging_config.file_max_size),
            backupCount=logging_config.file_backup_count,
            encoding="utf-8",
        )
        file_handler.setFormatter(logging.Formatter(logging_config.format))
        file_handler.setLevel(level)
        root.addHandler(file_handler)


# Global configuration manager instance
_config_manager: Optional[ConfigManager] = None


def get_config_manager(config_dir: Optional[str] = None, environment: Optional[str] = None) -> ConfigManager:
    """Global configuration manager; arguments only apply on first use"""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager(config_dir, environment)
    return _config_manager


def get_config() -> Config:
    return get_config_manager().config


def reload_config():
    if _config_manager:
        _config_manager.reload()


def reset_config_manager():
    """Drop the global instance so the next access reloads from disk"""
    global _config_manager
    _config_manager = None


def is_debug() -> bool:
    return get_config().debug
