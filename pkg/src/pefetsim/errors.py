"""Exception and warning types raised across the simulator."""


class PeFetError(Exception):
    """Base class for all simulator errors."""


class NoDoubleWell(PeFetError):
    """Landau coefficients do not describe a double-well landscape."""


class ConvergenceFailure(PeFetError):
    """An iterative solve ran out of budget.

    ``last`` carries the final iterate when one exists.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class GeometryError(PeFetError):
    pass


class FitFailure(PeFetError):
    pass


class ReadDisturbRisk(PeFetError):
    pass


class UnsupportedArch(PeFetError):
    pass


class WriteIncomplete(PeFetError):
    pass


class SenseMarginFailure(PeFetError):
    pass


class ConfigError(PeFetError):
    """Invalid run configuration. ``lineno`` points into the source file when known."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class OutOfCalibrationRange(UserWarning):
    """Kappa outside the range the stress-boost law was fitted on."""


class ReadDisturbWarning(UserWarning):
    """Read bias inside the warning band below the coercive voltage."""


class DisturbViolation(PeFetError):
    """A write plan or write result puts a non-target cell past the coercive bias."""
