"""Exception types raised across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input data (non-finite readings, bad timestamps, schema)."""


class GeometryDegenerateError(ValueError):
    """Sensor placement is coplanar (or worse), so the y vector is not identifiable."""


class ConditioningError(ArithmeticError):
    """A matrix that must be inverted is numerically singular."""


class UnidentifiableError(ValueError):
    """Calibration data does not span enough orientations to solve for S and o."""

    def __init__(self, message: str, rank: int | None = None, orientations: int | None = None):
        super().__init__(message)
        self.rank = rank
        self.orientations = orientations


class AmbiguousAttitudeError(ValueError):
    """Marker geometry does not pin down a unique rotation."""
