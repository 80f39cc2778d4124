"""Exception types raised by the library.

Numerical degradations that should not abort a sweep (a quadrature that did
not reach its tolerance, an ill-conditioned determinant) are reported through
flags on the results instead of exceptions.
"""


class BORationalError(Exception):
    """Base class for every error raised here."""


class PoleInLowerHalfPlane(BORationalError, ValueError):
    pass


class DuplicatePole(BORationalError, ValueError):
    pass


class NonpositiveEpsilon(BORationalError, ValueError):
    pass


class PoleHit(BORationalError, ZeroDivisionError):
    pass


class PathCrossesCut(BORationalError):
    pass


class SingularityTooClose(BORationalError):
    pass


class GeometryInfeasible(BORationalError):
    pass


class NonFiniteIntegrand(BORationalError, FloatingPointError):
    pass


class NonIntegrableEndpoint(BORationalError, ValueError):
    pass


class SingularB(BORationalError, ArithmeticError):
    pass


class DomainError(BORationalError, ValueError):
    pass


class OrderTooLarge(BORationalError, ValueError):
    pass


class ConfigError(BORationalError, ValueError):
    pass
