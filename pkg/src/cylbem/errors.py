class CylbemError(Exception):
    """Base class for all errors raised by cylbem."""


class ModelError(CylbemError, ValueError):
    """Invalid model or region configuration."""


class ZeroPotential(ModelError):
    pass


class NegativePotential(ModelError):
    pass


class CurveIntersection(ModelError):
    pass


class MissingExteriorPotential(ModelError):
    """V vanishes on the cross-section complement of N at infinity."""


class NonPositiveGroundState(ModelError):
    pass


class IrregularCurve(ModelError):
    pass


class TruncationTooShort(ModelError):
    pass


class OffsetTooLarge(ModelError):
    pass


class CoincidentPoints(CylbemError, ValueError):
    pass


class TooCloseToBoundary(CylbemError, ValueError):
    pass


class ExtrapolationUnstable(CylbemError, ArithmeticError):
    pass


class SolveFailure(CylbemError, ArithmeticError):
    pass


class SingularFamily(CylbemError, ArithmeticError):
    pass


class IllConditioned(CylbemError, ArithmeticError):
    pass


class SourceTooClose(CylbemError, ValueError):
    pass
