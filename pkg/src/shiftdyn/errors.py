"""Exception types shared across the package."""


class ShiftDynError(Exception):
    """Base class for all package errors."""


class WindowOverflow(ShiftDynError):
    """A dense operation would push nonzero content outside its index window."""


class NonConvergence(ShiftDynError):
    """An iterative numerical routine exceeded its iteration cap."""


class RepresentationError(ShiftDynError, ValueError):
    """The requested result has no exact representation (e.g. infinite support)."""


class NotInvertible(ShiftDynError, ArithmeticError):
    """A shift coefficient vanished where an inverse was requested."""


class InvalidParameter(ShiftDynError, ValueError):
    pass


class SupportCollision(ShiftDynError, ValueError):
    """Witness summands would overlap (shift length too short for the support)."""


class StarConditionUnverified(ShiftDynError):
    """The orthogonality condition on the unitary tuple failed to verify."""


class ConfigInvalid(ShiftDynError, ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
