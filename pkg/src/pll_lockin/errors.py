"""Exception types shared across the package."""


class LoopParameterError(ValueError):
    """A loop parameter violates its domain constraint."""


class NumericsError(RuntimeError):
    """An iterative numeric routine failed to converge or lost its bracket."""


class ApplicabilityError(ValueError):
    """A published estimate was requested outside its region of validity."""
