"""Exception types raised by tubeforms."""


class TubeformsError(Exception):
    """Base class for all package errors."""


class InadmissibleSpaceForm(TubeformsError, ValueError):
    pass


class DegenerateTangentPlane(TubeformsError, ValueError):
    pass


class NullNormal(TubeformsError, ValueError):
    pass


class FlatSpaceHasNoPolar(TubeformsError, ValueError):
    pass


class FrameSignatureUnavailable(TubeformsError, ValueError):
    pass


class FrameSignatureMismatch(TubeformsError, ValueError):
    pass


class RegularityLoss(TubeformsError, ArithmeticError):
    pass


class NotInLieAlgebra(TubeformsError, ValueError):
    pass


class WrongClassification(TubeformsError, ValueError):
    pass


class InvalidParabolicData(TubeformsError, ValueError):
    pass


class ParabolicHasNoDistance(TubeformsError, ValueError):
    pass


class VanishingPrincipalCurvature(TubeformsError, ArithmeticError):
    pass


class OutOfDomain(TubeformsError, ValueError):
    pass


class ImmersionViolation(TubeformsError, ValueError):
    pass


class NotATableRow(TubeformsError, ValueError):
    pass


class UnsupportedChart(TubeformsError, ValueError):
    pass


class SceneError(TubeformsError, ValueError):
    pass
