from typing import List, Optional, Tuple

# Process exit codes used by the CLI
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_BUDGET = 4


class OsaError(Exception):
    """Base error: carries the CLI exit code and a human readable detail."""

    exit_code = EXIT_VALIDATION

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidParametersError(OsaError):
    exit_code = EXIT_VALIDATION


class InvalidArgumentError(OsaError):
    exit_code = EXIT_USAGE


class UsageError(OsaError):
    exit_code = EXIT_USAGE


class ImpossibleObservationError(OsaError):
    exit_code = EXIT_VALIDATION

    def __init__(self, k: int, detail: Optional[str] = None):
        super().__init__(detail or f"Observation K={k} has zero probability under the current belief")
        self.k = k


class InfeasibleRequirementError(OsaError):
    exit_code = EXIT_VALIDATION

    def __init__(self, slot: int, delta_low: float, delta_high: float, requirement: float, detail: Optional[str] = None):
        super().__init__(
            detail
            or f"Infeasible PU requirement at slot {slot}: X={requirement:.12g}, "
               f"bracket [{delta_low:.12g}, {delta_high:.12g}]"
        )
        self.slot = slot
        self.delta_low = delta_low
        self.delta_high = delta_high
        self.requirement = requirement


class SurplusPreconditionError(OsaError):
    exit_code = EXIT_VALIDATION


class BudgetExceededError(OsaError):
    exit_code = EXIT_BUDGET

    def __init__(self, required: int, budget: int):
        super().__init__(f"Belief tree needs {required} nodes, budget is {budget}")
        self.required = required
        self.budget = budget


class ConfigValidationError(OsaError):
    exit_code = EXIT_VALIDATION

    def __init__(self, violations: List[Tuple[str, str]]):
        lines = "; ".join(f"{ptr}: {msg}" for ptr, msg in violations)
        super().__init__(f"Invalid scenario config: {lines}")
        self.violations = violations
