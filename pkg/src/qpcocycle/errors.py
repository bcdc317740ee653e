"""Exception hierarchy shared by every module."""


class CocycleError(Exception):
    """Base class for all library errors."""


class DomainError(CocycleError, ValueError):
    """An argument lies outside the domain where the object is defined."""


class ContractError(CocycleError, ValueError):
    """A documented precondition of an operation is violated."""


class DegenerateInputError(CocycleError, ValueError):
    """The input is degenerate, e.g. ``f - mu`` vanishes identically."""


class NumericError(CocycleError, ArithmeticError):
    """A numerical routine failed or produced an inconsistent result."""


class IllConditionedError(NumericError):
    """A sampled curve passes too close to the origin."""


class ResolutionError(NumericError):
    """Adaptive sampling did not reach the requested resolution."""


class MarginError(ContractError):
    """Quadrature refused: a zero lies too close to the integration line."""


class PrecisionError(NumericError):
    """Estimator spread is too large for the requested finite difference."""


class WorkingHeightError(NumericError):
    """No height with a uniform lower bound above 2 was found."""
