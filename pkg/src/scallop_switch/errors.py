"""Exception types shared across the package."""


class ScallopError(Exception):
    """Base class for all package errors."""


class DomainError(ScallopError, ValueError):
    """An angle left the admissible opening interval.

    ``t`` is the time of the violation when it comes from a time signal.
    """

    def __init__(self, message, t=None, theta=None):
        super().__init__(message)
        self.t = t
        self.theta = theta


class RegularityError(ScallopError, ValueError):
    """Parameters for which the regime gap is not strictly increasing."""


class CoherenceError(ScallopError, ValueError):
    """Initial regime contradicts the regime forced by the input."""


class MissingHintError(ScallopError, ValueError):
    """Initial input lies in an ambiguous zone and no regime hint was given."""


class InfeasibleError(ScallopError, ValueError):
    """A requested displacement or control cannot be realized.

    ``interval`` carries the achievable displacement interval when known.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class ValidationError(ScallopError, ValueError):
    """A constructed control violates the switching plan it was built for."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
