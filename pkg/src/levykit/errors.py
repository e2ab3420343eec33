"""Exception hierarchy shared by all levykit modules."""


class LevyKitError(Exception):
    """Base class for every error raised by levykit."""


class NonFiniteInput(LevyKitError, ValueError):
    pass


class TauNonPositive(LevyKitError, ValueError):
    pass


class QuadratureFailure(LevyKitError, ArithmeticError):
    """An integral estimate did not reach its error tolerance."""


class InversionFailure(QuadratureFailure):
    """Fourier inversion of a characteristic function failed to converge."""


class NonIntegrable(LevyKitError, ValueError):
    pass


class BesselRangeError(LevyKitError, OverflowError):
    """Bessel evaluation left the representable range (overflow or underflow)."""


class UnsupportedMixing(LevyKitError, NotImplementedError):
    pass


class CholeskyFailure(LevyKitError, ValueError):
    pass


class NotRepresentable(LevyKitError, ValueError):
    pass


class ExponentNotInteger(LevyKitError, ValueError):
    pass


class ExponentOutOfRange(LevyKitError, ValueError):
    pass


class ParameterOutOfRange(LevyKitError, ValueError):
    pass


class NoAdmissibleParams(LevyKitError, ValueError):
    pass


class NotHyperbola(LevyKitError, ValueError):
    pass


class SearchBudgetExceeded(LevyKitError, RuntimeError):
    pass


class SpecParseError(LevyKitError, ValueError):
    """A JSON document could not be turned into a levykit object."""
