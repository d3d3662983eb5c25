"""
Configuration validation utilities
Validates configuration settings for correctness and completeness
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Tuple

from .config_manager import Config, Environment

VALID_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


class ConfigValidator:
    """Validates configuration settings"""

    def __init__(self, config: Config):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.errors: List[str] = []
        self.warnings: List[str] = []

    def validate_all(self) -> Tuple[List[str], List[str]]:
        """
        Validate all configuration settings

        Returns:
            Tuple of (errors, warnings)
        """
        self.errors.clear()
        self.warnings.clear()

        self._validate_logging()
        self._validate_solver()
        self._validate_optimizer()
        self._validate_simulation()
        self._validate_oracle()
        self._validate_rebalance()
        self._validate_cache()
        self._validate_reporting()
        self._validate_scenario_defaults()
        self._validate_environment_specific()

        return self.errors.copy(), self.warnings.copy()

    def _validate_logging(self):
        log = self.config.logging
        if str(log.level).upper() not in VALID_LOG_LEVELS:
            self.errors.append(f"Invalid log level: {log.level}")
        if log.file_enabled:
            if not log.file_path:
                self.errors.append("Log file path is required when file logging is enabled")
            elif not Path(log.file_path).parent.exists():
                self.warnings.append(f"Log directory will be created: {Path(log.file_path).parent}")
        if log.file_backup_count < 0:
            self.errors.append("Log file_backup_count cannot be negative")

    def _validate_solver(self):
        solver = self.config.solver
        if not 0 < solver.tolerance < 1e-3:
            self.errors.append(f"Solver tolerance must be in (0, 1e-3), got {solver.tolerance}")
        if solver.max_iterations < 1:
            self.errors.append("Solver max_iterations must be at least 1")
        if solver.guess_budget < 1:
            self.errors.append("Solver guess_budget must be at least 1")
        if solver.negative_tolerance < 0:
            self.errors.append("Solver negative_tolerance cannot be negative")
        if not 0 < solver.fd_step < 1e-2:
            self.errors.append(f"Solver fd_step must be in (0, 1e-2), got {solver.fd_step}")
        if solver.tolerance > 1e-8:
            self.warnings.append("Loose solver tolerance; conservation audits may fail")

    def _validate_optimizer(self):
        opt = self.config.optimizer
        if opt.multistarts < 1:
            self.errors.append("Optimizer multistarts must be at least 1")
        if opt.max_iters < 1:
            self.errors.append("Optimizer max_iters must be at least 1")
        if not 0 < opt.grad_step < 0.1:
            self.errors.append(f"Optimizer grad_step must be in (0, 0.1), got {opt.grad_step}")
        if opt.grad_floor <= 0:
            self.errors.append("Optimizer grad_floor must be positive")
        if opt.infeasible_penalty <= 0:
            self.errors.append("Optimizer infeasible_penalty must be positive")
        elif opt.infeasible_penalty < 100:
            self.warnings.append("Optimizer infeasible_penalty is close to plausible costs per passenger")
        if opt.no_improve_patience < 1:
            self.errors.append("Optimizer no_improve_patience must be at least 1")
        if opt.idle_upper_factor <= 0:
            self.errors.append("Optimizer idle_upper_factor must be positive")
        if opt.workers < 1:
            self.errors.append("Optimizer workers must be at least 1")

    def _validate_simulation(self):
        sim = self.config.simulation
        if sim.horizon <= 0:
            self.errors.append("Simulation horizon must be positive")
        if sim.warmup is not None and not 0 <= sim.warmup < sim.horizon:
            self.errors.append("Simulation warmup must satisfy 0 <= warmup < horizon")
        if sim.replications < 1:
            self.errors.append("Simulation replications must be at least 1")
        if sim.workers < 1:
            self.errors.append("Simulation workers must be at least 1")
        if not 0 < sim.diagnostic_tolerance < 1:
            self.errors.append("Simulation diagnostic_tolerance must be in (0, 1)")

    def _validate_oracle(self):
        oracle = self.config.oracle
        if oracle.samples < 1:
            self.errors.append("Oracle samples must be at least 1")
        elif oracle.samples < 100_000:
            self.warnings.append(f"Oracle samples {oracle.samples} is below 1e5; estimates may not pass")
        if not 0 < oracle.tolerance < 1:
            self.errors.append("Oracle tolerance must be in (0, 1)")
        if oracle.chunk_size < 1:
            self.errors.append("Oracle chunk_size must be at least 1")
        if any(n < 1 for n in oracle.nearest_counts):
            self.errors.append("Oracle nearest_counts must be positive")

    def _validate_rebalance(self):
        rebalance = self.config.rebalance
        if rebalance.balance_tolerance <= 0:
            self.errors.append("Rebalance balance_tolerance must be positive")
        if rebalance.netting_tolerance < 0:
            self.errors.append("Rebalance netting_tolerance cannot be negative")

    def _validate_cache(self):
        cache = self.config.cache
        if cache.max_entries < 0:
            self.errors.append("Cache max_entries cannot be negative")
        if cache.guess_neighbors < 0:
            self.errors.append("Cache guess_neighbors cannot be negative")

    def _validate_reporting(self):
        reporting = self.config.reporting
        if reporting.significant_digits < 6:
            self.errors.append("Reporting significant_digits must be at least 6")
        elif reporting.significant_digits > 17:
            self.warnings.append("Reporting significant_digits above 17 adds no precision")

    def _validate_scenario_defaults(self):
        defaults = self.config.scenario
        if defaults.speed_kmh <= 0:
            self.errors.append("Scenario default speed_kmh must be positive")
        if defaults.value_of_time < 0:
            self.errors.append("Scenario default value_of_time cannot be negative")
        if defaults.driver_wage < 0 or defaults.vehicle_cost_per_km < 0:
            self.errors.append("Scenario default vehicle costs cannot be negative")

    def _validate_environment_specific(self):
        if self.config.environment == Environment.PRODUCTION:
            if self.config.debug:
                self.warnings.append("Debug mode is enabled in production")
            if self.config.oracle.samples < 1_000_000:
                self.warnings.append("Production oracle runs should use at least 1e6 samples")


def validate_config(config: Config) -> Dict[str, Any]:
    """
    Validate configuration and return validation results

    Args:
        config: Configuration to validate

    Returns:
        Dictionary with validation results
    """
    validator = ConfigValidator(config)
    errors, warnings = validator.validate_all()

    return {
        "valid": len(errors) == 0,
        "errors": errors,
        "warnings": warnings,
        "error_count": len(errors),
        "warning_count": len(warnings),
    }
