"""Exception hierarchy shared across the package."""


class StarlocError(Exception):
    """Base class for all domain errors raised by this package."""


class ZeroDistanceError(StarlocError):
    """Reference and target positions coincide; direction is undefined."""


class NonpositiveDistanceError(StarlocError):
    """A link distance must be strictly positive."""


class ElevationSingularityError(StarlocError):
    """Elevation at +-pi/2: azimuth derivatives blow up, Jacobian undefined."""


class DimensionMismatchError(StarlocError):
    """Array shapes are inconsistent with the configured system sizes."""


class InsufficientSlotsError(StarlocError):
    """Structured phase designs need at least twice as many slots as elements."""


class NotPowerOfTwoError(StarlocError):
    """Sylvester Hadamard construction requires a power-of-two slot count."""


class RankDeficientError(StarlocError):
    """A subspace argument has rank zero, or a projected block lost rank."""


class SingularFimError(StarlocError):
    """Fisher information matrix is numerically singular; no finite bound.

    Carries the offending condition number (lambda_max / lambda_min, inf
    when the smallest eigenvalue is nonpositive).
    """

    def __init__(self, condition_number: float):
        self.condition_number = float(condition_number)
        super().__init__(
            f"Fisher information matrix is singular or too ill-conditioned "
            f"to invert (condition number {self.condition_number:.3e})"
        )


class ConfigParseError(StarlocError):
    """Scenario config file could not be parsed as YAML."""
