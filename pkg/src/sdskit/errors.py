"""Exception hierarchy shared by every module."""


class SDSError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(SDSError, ValueError):
    pass


class DomainError(SDSError, ValueError):
    pass


class InvalidDirectionError(SDSError, ValueError):
    pass


class DuplicateDirectionError(SDSError, ValueError):
    pass


class EnumerationBudgetError(SDSError, RuntimeError):
    pass


class DegenerateSetError(SDSError, ValueError):
    """No linearly independent subset of size n exists in the direction set."""


class ObjectivePathologyError(SDSError, ArithmeticError):
    """The objective returned a non-finite value."""

    def __init__(self, x, value):
        super().__init__(f"non-finite objective value {value!r}")
        self.x = x
        self.value = value


class EvaluationBudgetExceeded(SDSError, RuntimeError):
    """Raised before an evaluation that would exceed the evaluation budget."""


class InitializationBudgetError(SDSError, RuntimeError):
    pass


class ConfigurationError(SDSError, ValueError):
    pass


class UnknownObjectiveError(SDSError, LookupError):
    pass
