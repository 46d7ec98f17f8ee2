"""Exception hierarchy shared by all modules."""


class BallCompError(Exception):
    """Base class for every error raised by :mod:`ballcomp`."""


class DegenerateDenominator(BallCompError):
    """The denominator ``<z, C> + d`` can vanish on the closed ball."""


class ZeroScale(BallCompError):
    """All entries of a map matrix are zero."""


class NotFixingE1(BallCompError):
    pass


class RelationViolation(BallCompError):
    """A map fixing e1 violates the matrix relations forced by the self-map property."""


class NotUnitVector(BallCompError):
    pass


class NotSelfMap(BallCompError):
    """The supremum of ``|phi|`` over the sphere exceeds 1."""


class NoContact(BallCompError):
    """No boundary point is mapped to the sphere."""


class NoAngularDerivative(BallCompError):
    pass


class Indeterminate(BallCompError):
    """The sup-norm sits at 1 within tolerance but no contact point is certified."""


class InvalidParams(BallCompError):
    pass


class IndexOutOfRange(InvalidParams):
    pass


class OutsideBall(InvalidParams):
    pass


class NonConvergent(BallCompError):
    """An extrapolated limit failed to contract."""


class QuadratureUnderResolved(BallCompError):
    pass


class PreconditionFailed(BallCompError):
    pass


class ParseError(BallCompError):
    """A map-spec or config document could not be parsed.

    ``location`` names the line/column or field path that failed.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)
