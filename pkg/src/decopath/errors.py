"""Exception hierarchy shared by all modules."""


class DecopathError(Exception):
    """Base class for all package errors."""


class DomainError(DecopathError, ValueError):
    """Evaluation point outside the domain of a path."""


class ShapeError(DecopathError, ValueError):
    """Mismatched domains or dimensions."""


class ParameterError(DecopathError, ValueError):
    """Invalid numerical parameter."""


class ContractError(DecopathError, ValueError):
    """Input violates a structural precondition."""


class AccuracyError(DecopathError, ArithmeticError):
    """A refinement loop failed to reach its tolerance."""


class DivergenceError(DecopathError, ArithmeticError):
    """A solution left the configured bounded region."""


class GeometryError(DecopathError, RuntimeError):
    """Billiard ray tracing found no admissible collision."""


class StatisticsError(DecopathError, ValueError):
    """Too few samples for the requested estimate."""

    def __init__(self, message, count=None):
        super().__init__(message if count is None else f"{message} (got {count} samples)")
        self.count = count
