"""Exception types shared across the library."""


class XlMimoError(Exception):
    """Base class for all library-specific errors."""


class DomainError(XlMimoError, ValueError):
    """An argument violates a documented precondition."""


class SingularityError(XlMimoError, ValueError):
    """Field-point/source geometry too close for the channel model to hold."""


class UnsupportedConfigError(XlMimoError, ValueError):
    """Operation requires an array layout the given config does not have."""


class DegenerateUserError(XlMimoError, ValueError):
    """User position makes every received power zero (on the array plane)."""


class DegenerateChannelError(XlMimoError, ValueError):
    """Channel vector has no energy; detector cannot be normalized."""


class SingularInterferenceError(XlMimoError, ValueError):
    """Interference subspace is rank deficient beyond the condition guard."""


class UnservableUserError(XlMimoError, ValueError):
    """Target channel lies (numerically) inside the interference subspace."""


class InsufficientApertureError(XlMimoError, ValueError):
    """Antenna subset too small to null the requested interferers."""


class SearchFailureError(XlMimoError, RuntimeError):
    """A bracketing / bisection search did not converge within its caps."""
