"""Exception hierarchy shared by all cstarloc modules."""


class CStarLocError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(CStarLocError, ValueError):
    pass


class ShapeError(CStarLocError, ValueError):
    """Block counts or shapes do not match, or objects live over different algebras/modules."""


class PositivityError(CStarLocError, ValueError):
    pass


class DegenerateInput(CStarLocError, ValueError):
    pass


class UnsupportedRule(CStarLocError, ValueError):
    """A sigma-convex weight rule has no closed-form tail."""


class InvalidFunctional(CStarLocError, ValueError):
    """A map offered to the Riesz representation is not A-linear."""


class NoSeparation(CStarLocError):
    """x0 lies in L, so no state can separate it."""


class SearchInconclusive(CStarLocError):
    """The vector-state search exhausted its budget without a certified witness.

    This is not a disproof of anything; the best distance seen is attached.
    """

    def __init__(self, message, best_distance=0.0, evaluations=0):
        super().__init__(message)
        self.best_distance = best_distance
        self.evaluations = evaluations
