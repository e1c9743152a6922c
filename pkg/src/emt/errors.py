"""Exception hierarchy shared across the package."""


class EMTError(Exception):
    """Base class for all package errors."""


class InvalidInputError(EMTError, ValueError):
    pass


class InvalidParameterError(EMTError, ValueError):
    pass


class DimensionError(EMTError, ValueError):
    pass


class ContractError(EMTError, RuntimeError):
    """Raised when a caller breaks an API contract (e.g. mixing co-state modes)."""


class IntegrationError(EMTError, ArithmeticError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"{message} (grid index {index})")
        self.index = index


class ScenarioError(EMTError, ValueError):
    """Scenario text failed to parse or validate; ``violations`` lists every problem found."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
