"""Exception hierarchy shared by all solver modules."""


class BarwaveError(Exception):
    """Base class for every error raised by barwave."""


class DomainError(BarwaveError, ValueError):
    """Input outside the admissible domain (bad length, position, ...)."""


class ConfigError(BarwaveError):
    """Scenario file could not be parsed or validated."""


class CriticalCoefficientError(BarwaveError):
    """A leading or trailing characteristic coefficient vanishes (some h_i = +-1)."""


class UnsupportedRegimeError(BarwaveError):
    """Parameter regime for which no solver path exists."""


class SuperInstabilityError(UnsupportedRegimeError):
    """Some h_i = -1: the solution ceases to exist when a wavefront hits that damper."""


class NumericalFailure(BarwaveError):
    """Base class for numerical breakdowns (exit code 4 on the CLI)."""


class ConvergenceFailure(NumericalFailure):
    """Root polishing did not reach the residual target."""


class MultiplicityError(NumericalFailure):
    """A nonzero eigenvalue is not simple; the modal expansion does not apply."""


class PoleProximityError(NumericalFailure):
    """Green's function requested too close to one of its poles."""


class UnsupportedDoublePoleError(NumericalFailure):
    """Double pole at s = 0 outside the family with a known principal part."""


class ExpansionInvalidError(BarwaveError):
    """Modal expansion requested in a critical regime."""


class MeshError(BarwaveError):
    """Damper position cannot be placed on a mesh node."""
