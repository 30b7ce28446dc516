"""Exception hierarchy shared by all modules."""


class LevyErgodicityError(Exception):
    """Base class for every error raised by the package."""


class ModelInvalidError(LevyErgodicityError, ValueError):
    """The model or kernel parameters violate a structural requirement."""


class DivergenceError(ModelInvalidError):
    """An integral that must be finite diverges for the given parameters."""


class TailIndexMismatchError(ModelInvalidError):
    """Declared tail indices are inconsistent with the kernel's tail ratios."""


class QuadratureError(LevyErgodicityError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, worst_panel=None, estimate=None, abserr=None):
        super().__init__(message)
        self.worst_panel = worst_panel
        self.estimate = estimate
        self.abserr = abserr


class SeriesDivergenceError(LevyErgodicityError, ArithmeticError):
    """Series terms failed to decrease."""


class InvalidRateFunctionError(LevyErgodicityError, ValueError):
    """A rate function f is not positive, increasing and concave where required."""


class RateRangeError(LevyErgodicityError, ValueError):
    """The requested value lies outside the range of a bounded F."""


class NoInwardDriftError(LevyErgodicityError, ValueError):
    """The drift pushes outward somewhere on the outer grid."""


class BalanceViolationError(LevyErgodicityError, ValueError):
    """kappa + min(sigma, 2) > 1 fails, or an excluded parameter corner was hit."""


class NotApplicableError(LevyErgodicityError, ValueError):
    """A formula was requested outside the parameter range it covers."""


class PreconditionError(LevyErgodicityError, ValueError):
    """An operation was called with arguments violating its preconditions."""


class CutoffError(LevyErgodicityError, ValueError):
    """The small-jump cutoff leaves an infinite jump intensity."""


class ExplosionError(LevyErgodicityError, OverflowError):
    """A simulated chain left the representable range."""

    def __init__(self, message, step=None, replica=None):
        super().__init__(message)
        self.step = step
        self.replica = replica
