"""Exception types raised by the analysis routines."""


class PhCenterError(Exception):
    """Base class for all errors raised by :mod:`phcenter`."""


class DimensionError(PhCenterError, ValueError):
    pass


class NotHermitian(PhCenterError, ValueError):
    pass


class SingularShift(PhCenterError):
    """The shifted matrix ``sI - A`` could not be solved against reliably."""


class SingularS(PhCenterError):
    """``S = D + D^H`` is singular or indefinite."""


class NotPSD(PhCenterError):
    pass


class ImaginaryAxisEigenvalue(PhCenterError):
    """The Hamiltonian matrix has eigenvalues on the imaginary axis."""


class SubspaceExtractionFailed(PhCenterError):
    pass


class Infeasible(PhCenterError):
    """The point lies outside the open domain of the barrier."""


class NotStrictlyPassive(PhCenterError):
    pass


class MaxIterations(PhCenterError):
    """Iteration cap reached; ``result`` holds the best iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotPositiveDefinite(PhCenterError):
    pass


class NotFeasible(PhCenterError):
    pass


class SearchFailed(PhCenterError):
    pass


class Unstable(PhCenterError):
    pass


class OrderingViolated(PhCenterError):
    pass
