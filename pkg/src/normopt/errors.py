"""Exception types shared across the package."""


class NormoptError(Exception):
    """Base class for all package errors."""


class ConfigurationError(NormoptError, ValueError):
    """A configuration value is invalid or inconsistent."""


class ConstraintError(NormoptError, ValueError):
    """A norm vector violates its bounds or the redistribution simplex."""


class ContractError(NormoptError, ValueError):
    """An operation was called with inputs outside its contract."""


class DegenerateStateError(NormoptError, ArithmeticError):
    """A society state on which a value objective is undefined (e.g. zero total wealth)."""
