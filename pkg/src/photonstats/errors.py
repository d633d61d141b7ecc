"""Exception hierarchy shared by all photonstats modules."""


class PhotonStatsError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(PhotonStatsError, ValueError):
    """Operator shape does not match the target subsystem or space."""


class ParameterError(PhotonStatsError, ValueError):
    """Physical parameters or model/space combination are invalid."""


class NonHermitianError(PhotonStatsError, ValueError):
    pass


class NonUniqueSteadyStateError(PhotonStatsError):
    """The Liouvillian has a degenerate zero eigenspace."""


class ConvergenceError(PhotonStatsError):
    """A linear solve or time integration did not meet its tolerance."""


class UndefinedCorrelationError(PhotonStatsError):
    """Normalized correlation requested for a (numerically) empty cavity."""


class SingularPointError(PhotonStatsError):
    """A closed-form amplitude denominator vanishes."""
