"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class DeJongError(Exception):
    exit_code = 2


class ModelError(DeJongError, ValueError):
    """Malformed space, kernel or model file."""


class ContractError(DeJongError, ValueError):
    """A precondition of an operation was violated."""


class NormalizationError(ContractError):
    pass


class PositiveDefinitenessError(ContractError):
    pass


class BudgetError(DeJongError):
    """Exact enumeration would exceed the configured atom budget."""

    exit_code = 3


class CapabilityError(DeJongError):
    """Requested size is beyond what the enumerators support."""

    exit_code = 3
