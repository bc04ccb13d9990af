"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A network configuration violates one of its structural constraints."""


class ShapeError(ValueError):
    """Matrix dimensions are inconsistent with the network configuration."""


class InfeasibilityError(RuntimeError):
    """A required null space is numerically smaller than theory guarantees.

    The message names the deficient matrix so callers can tell which
    zero-forcing step failed.
    """


class NumericError(RuntimeError):
    """A root finder or iterative routine failed to meet its tolerance."""
