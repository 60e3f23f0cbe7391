"""Errors Module"""


class OvalsError(Exception):
    """Base class for failures raised by the lab."""


class ConfigError(OvalsError, ValueError):
    """Experiment configuration did not validate."""


class CoverageError(OvalsError, ValueError):
    """Samples do not cover the requested window or spatial range."""


class NumericalError(OvalsError, RuntimeError):
    """A solver or integrator could not produce a trustworthy result."""


class DegenerateGeometryError(NumericalError):
    """Coincident nodes or an off-axis node collapsed onto an axis."""


class StepRejectionError(NumericalError):
    """Too many consecutive step rejections."""


class NonTerminationError(NumericalError):
    """The step guard was exhausted before the stop rule fired."""


class ShootingError(NumericalError):
    """An ODE profile blew up or left its admissible range."""


class ConvexityError(NumericalError):
    """A profile that must stay convex (or concave) lost that property."""


class TargetOutOfRangeError(NumericalError):
    """
    A normalization or ratio target lies outside the achieved range.

    :param achieved: (low, high) range that was achieved
    """

    def __init__(self, message: str, achieved: tuple = None):
        super().__init__(message)
        self.achieved = achieved
