"""Exception hierarchy shared by every bosesep module."""


class BoseSepError(Exception):
    """Base class for all library errors."""


class SizeLimit(BoseSepError):
    """A requested dimension exceeds the configured limit."""


class ShapeError(BoseSepError, ValueError):
    """Array or occupation vector inconsistent with the system shape."""


class NotHermitian(BoseSepError, ValueError):
    pass


class NotPSD(BoseSepError, ValueError):
    pass


class NumericalFailure(BoseSepError):
    pass


class NotInRange(BoseSepError, ValueError):
    """Vector does not lie in the range of the given operator."""


class NotSymmetricSupport(BoseSepError, ValueError):
    """Operator is not supported on the symmetric subspace."""


class NormError(BoseSepError, ValueError):
    pass


class RankTooLarge(BoseSepError, ValueError):
    pass


class Unsupported(BoseSepError, ValueError):
    """No rank threshold is defined for this shape."""


class ExtractionFailed(BoseSepError):
    """The greedy decomposition could not find a product vector.

    This is a statement about the heuristic, not a proof of entanglement.
    """

    def __init__(self, message, terms=None, residual_trace=None):
        super().__init__(message)
        self.terms = terms or []
        self.residual_trace = residual_trace


class NoConvergence(BoseSepError):
    pass


class ParseError(BoseSepError, ValueError):
    pass


class PreconditionFailed(BoseSepError, ValueError):
    """An operation was called on an input its contract excludes."""
