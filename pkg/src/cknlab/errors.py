"""Exception types shared across the package."""


class CknLabError(Exception):
    """Base class for all package errors."""


class ConstraintViolation(CknLabError):
    """A parameter constraint failed; the message names the inequality."""


class DomainError(CknLabError):
    """Input outside the mathematical domain of an operation."""


class DegenerateCoefficient(CknLabError):
    """A coefficient whose Laplacian vanishes at a pole; degree theory undefined."""


class InterpolationError(CknLabError):
    """Evaluation of a tabulated coefficient outside its sample range."""


class GridMismatch(CknLabError):
    """Profiles defined on incompatible grids were combined."""


class OutOfRange(CknLabError):
    """A radius outside the grid range [exp(-S), exp(S)]."""


class NewtonDivergence(CknLabError):
    """Newton iteration failed to converge; carries the last residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PositivityLoss(CknLabError):
    """A solver iterate crossed zero; carries the offending location."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ConfigError(CknLabError):
    """Malformed run configuration (CLI exit code 2)."""
