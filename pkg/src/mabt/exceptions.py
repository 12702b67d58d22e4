"""Exception types raised by the bound computations."""


class DegenerateTilt(ValueError):
    """The empirical distribution cannot be tilted (constant influence scores)."""


class CalibrationFailure(RuntimeError):
    """No tilting parameter inside the search bracket attains the target level.

    Attributes
    ----------
    bracket : tuple of float
        The last bracket that was examined.
    level : float
        Level function value at the most extreme tilting parameter tried.
    """

    def __init__(self, message, bracket=None, level=None):
        super().__init__(message)
        self.bracket = bracket
        self.level = level
