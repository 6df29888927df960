"""Exception hierarchy shared by every nosig module."""


class NosigError(ValueError):
    """Base class for all precondition failures raised by nosig."""


class NotHermitian(NosigError):
    pass


class NotOrthonormal(NosigError):
    pass


class TooManyColumns(NosigError):
    pass


class DimensionMismatch(NosigError):
    pass


class InvalidEnsemble(NosigError):
    pass


class InvalidDensity(NosigError):
    pass


class NotSameDensity(NosigError):
    pass


class NotUnitary(NosigError):
    pass


class SizeTooSmall(NosigError):
    pass


class NotEquivalent(NosigError):
    """Two ensembles do not share a density matrix.

    ``distance`` carries the trace distance between the two densities.
    """

    def __init__(self, message, distance=float("nan")):
        super().__init__(message)
        self.distance = distance


class BadBasis(NosigError):
    pass


class DuplicateLabels(NosigError):
    pass


class NotInTable(NosigError):
    pass


class NonPositiveTime(NosigError):
    pass


class NotPure(NosigError):
    pass


class NotAStateMap(NosigError):
    """Raised when a density-level spec is asked to act on a single vector."""


class BadStep(NosigError):
    pass


class StepTooLarge(NosigError):
    pass


class BadParameter(NosigError):
    pass
