"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`SpectralDesignError`, so callers can catch one base class.
"""


class SpectralDesignError(Exception):
    """Base class for all package errors."""


class ZeroNotIncluded(SpectralDesignError):
    """The target set does not contain 0."""


class MalformedSet(SpectralDesignError):
    """The target-set description is structurally invalid."""


class EmptyInput(SpectralDesignError):
    pass


class BracketFailure(SpectralDesignError):
    """A root could not be isolated where theory guarantees one."""


class TargetOutOfRange(SpectralDesignError):
    pass


class CountMismatch(SpectralDesignError):
    """Shooting and finite-difference eigenvalue counts disagree."""


class IndexOutOfRange(SpectralDesignError):
    pass


class NoBracket(SpectralDesignError):
    pass


class NonConvergence(SpectralDesignError):
    """Coordinate iteration failed to reach the requested tolerance.

    The best point found is kept in ``best`` together with its residual.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class CouplingTooStrong(SpectralDesignError):
    pass


class SingularRmu(SpectralDesignError):
    pass


class InvalidModel(SpectralDesignError):
    pass
