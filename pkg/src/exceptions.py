"""
Planner Exceptions
Error hierarchy shared by the grid, scenario, network, rebalancing and optimization layers
"""
from typing import Any, Dict, List, Optional


class PlannerError(Exception):
    """Base class for all planner errors"""


class GridValidationError(PlannerError):
    """Zone layout violates a lattice invariant"""


class ScenarioLoadError(PlannerError):
    """Scenario file could not be loaded"""

    def __init__(self, message: str, field_name: Optional[str] = None):
        self.field_name = field_name
        super().__init__(f"{field_name}: {message}" if field_name else message)


class DesignValidationError(PlannerError):
    """Design variables violate bounds or the path-fraction constraints"""

    def __init__(self, message: str, pair: Optional[str] = None):
        self.pair = pair
        super().__init__(f"{pair}: {message}" if pair else message)


class StateIndexError(PlannerError, KeyError):
    """Vehicle state is not part of the state space"""

    def __str__(self) -> str:
        return Exception.__str__(self)


class UnservableError(PlannerError):
    """A caller class has positive demand but no suitable vehicle"""

    def __init__(self, zone: int, caller_class: str):
        self.zone = zone
        self.caller_class = caller_class
        super().__init__(f"zone {zone}: no suitable vehicle for {caller_class} callers")


class SolverError(PlannerError):
    """Numerical failure inside a linear or nonlinear solve"""


class BalanceError(PlannerError):
    """Net rebalancing rates do not sum to zero"""


class IngestionError(PlannerError):
    """Trip ingestion produced no usable records"""


class OptimizationError(PlannerError):
    """Every optimizer start ended infeasible"""

    def __init__(self, message: str, diagnostics: Optional[List[Dict[str, Any]]] = None):
        self.diagnostics = diagnostics or []
        super().__init__(message)
