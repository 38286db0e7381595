"""Exception hierarchy shared by the numerical modules and the CLI."""


class WignerKinError(Exception):
    """Base class for all errors raised by this package."""


class NumericalGuardError(WignerKinError):
    """A numerical safety check failed; the result would not be trustworthy."""


class WindowTooSmallError(NumericalGuardError):
    """The grid window truncates non-negligible Wigner mass."""


class NonpositiveMarginalError(NumericalGuardError):
    """A tabulated quadrature marginal carries significant negative mass."""


class IllConditionedConditionalError(NumericalGuardError):
    """Conditional moment requested where the position density vanishes."""


class NonFiniteValueError(NumericalGuardError):
    """An evaluator produced NaN or infinite values on the grid."""
