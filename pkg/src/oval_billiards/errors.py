"""Exception hierarchy shared by the billiard modules."""


class BilliardError(Exception):
    """Base class for every error raised by this package."""


class ZeroChordError(BilliardError, ValueError):
    """Both chord endpoints are the same boundary point."""


class GrazingError(BilliardError, ValueError):
    """The outgoing angle is too close to 0 or pi to bounce reliably."""


class SolverError(BilliardError, RuntimeError):
    """The next-impact root solver did not converge.

    ``states`` holds the offending ``(phi, alpha)`` pairs.
    """

    def __init__(self, message, states=()):
        super().__init__(message)
        self.states = list(states)


class InvalidLevelError(BilliardError, ValueError):
    """An invariant curve was queried where its slope is undefined."""


class RootNotFound(BilliardError, ValueError):
    pass


class DomainError(BilliardError, ValueError):
    """Argument outside the domain interval of a contraction law."""


class StripEscape(BilliardError):
    """A fiber offset left the domain of the contraction law."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class SingularBasisError(BilliardError, ValueError):
    pass
