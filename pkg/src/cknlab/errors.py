"""Exception hierarchy shared by all modules."""


class CknError(Exception):
    """Base class for all package errors."""


class ParameterError(CknError, ValueError):
    """Parameters outside the admissible domain."""


class DimensionTooSmall(ParameterError):
    pass


class PNotInRange(ParameterError):
    pass


class AlphaOutOfRange(ParameterError):
    pass


class ClassicalDomainError(ParameterError):
    pass


class MultiplicityOverflow(CknError, OverflowError):
    pass


class NonIntegrable(CknError, ArithmeticError):
    """A weighted integral diverges at one of the radial ends."""


class DerivativeRequired(CknError, ValueError):
    pass


class ProfileFormatError(CknError, ValueError):
    """Malformed tabulated profile (CSV)."""


class IndefiniteWeight(CknError, ArithmeticError):
    pass


class GapNotResolved(CknError, ArithmeticError):
    pass


class NonConvergence(CknError, RuntimeError):
    pass


class ZeroBase(CknError, ValueError):
    pass


class BranchViolation(CknError, ValueError):
    pass


class OrthogonalityViolation(CknError, ValueError):
    pass


class ZeroFunction(CknError, ValueError):
    """A quotient or projection was requested for the zero function."""
