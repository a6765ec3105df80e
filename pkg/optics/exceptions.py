class CatadioptricError(Exception):
    """Base class for errors raised by the optics library"""

    exit_code = 1


class ValidationError(CatadioptricError):
    """The input does not describe a valid configuration"""

    exit_code = 2


class NumericalError(CatadioptricError):
    """A computation failed for numerical reasons"""

    exit_code = 3


class DegenerateNormal(NumericalError):
    pass


class BehindCamera(ValidationError):
    pass


class RayMissesMirror(NumericalError):
    pass


class NoSolution(NumericalError):
    pass


class ZeroPolynomial(ValidationError):
    pass


class RankDeficient(NumericalError):
    pass


class ResidualTooLarge(NumericalError):
    pass


class DegenerateQuadratic(NumericalError):
    pass


class DegenerateDirection(NumericalError):
    pass


class RigNotCentral(ValidationError):
    pass


class InconsistentVanishingPoint(ValidationError):
    pass


class AllParallelDirections(ValidationError):
    pass


class EmptyCurve(NumericalError):
    pass


class DegenerateNormalPlane(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass
