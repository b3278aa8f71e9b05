"""Exception hierarchy shared by all resonator_q modules.

The split between :class:`DataError` and :class:`NumericalError` mirrors the
CLI exit-code contract: bad inputs exit 2, failed numerics exit 3, anything
else exits 4.
"""


class ResonatorQError(Exception):
    """Base class for all errors raised by this package."""


class DataError(ResonatorQError):
    """Invalid input data, configuration, or domain violation."""


class GeometryError(DataError):
    """Inconsistent resonator geometry (e.g. pillar wider than the disk)."""


class FitDegenerateError(DataError):
    """Dataset cannot determine the requested fit parameters."""


class InsufficientSpanError(DataError):
    """Dataset does not span the range required by the fit."""


class NumericalError(ResonatorQError):
    """A numerical procedure failed to meet its tolerance."""


class ConvergenceError(NumericalError):
    """Iterative solver or optimizer did not converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved_tolerance=None):
        super().__init__(message)
        self.achieved_tolerance = achieved_tolerance
