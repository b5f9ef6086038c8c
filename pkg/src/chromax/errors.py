"""Exception and warning types raised across chromax."""


class ChromaxError(Exception):
    """Base class for every error raised by this package."""


class ParameterOutOfRange(ChromaxError, ValueError):
    pass


class ParameterInfeasible(ChromaxError, ValueError):
    pass


class DegreeOutOfRange(ChromaxError, IndexError):
    pass


class DomainViolation(ChromaxError, ValueError):
    pass


class UnsupportedPoint(ChromaxError, ValueError):
    """The kernel has no finite sign structure at the requested point."""


class KernelMismatch(ChromaxError, TypeError):
    pass


class MomentDivergence(ChromaxError, ArithmeticError):
    """Weighted moments do not settle under truncation refinement."""


class StieltjesUnstable(ChromaxError, ArithmeticError):
    pass


class EigensolveFailure(ChromaxError, ArithmeticError):
    pass


class GridTooCoarse(ChromaxError, ValueError):
    pass


class QuadratureNonConvergence(ChromaxError, ArithmeticError):
    pass


class TailTooHeavy(ChromaxError, ArithmeticError):
    pass


class Overflow(ChromaxError, OverflowError):
    """A dyadic result needs bit indices outside the allowed capacity."""


class ConfigError(ChromaxError, ValueError):
    pass


class IRLSNonConvergence(RuntimeWarning):
    """Iteratively reweighted least squares stopped before meeting its tolerance."""
