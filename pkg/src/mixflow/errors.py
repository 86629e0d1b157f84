"""Exception taxonomy shared by all mixflow modules."""


class MixflowError(Exception):
    """Base class for all mixflow errors."""


class ValidationError(MixflowError):
    """A physical-parameter or configuration invariant is violated."""


class NotSymmetric(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    pass


class NonPositiveEntry(ValidationError):
    pass


class BadDimension(ValidationError):
    pass


class SingularMatrix(MixflowError):
    pass


class LengthMismatch(MixflowError):
    pass


class WrongFrame(MixflowError):
    """Operation applied to a state/trajectory in the wrong coordinate frame."""


class NonPositiveDensity(ValidationError):
    pass


class SolverBlowup(MixflowError):
    """Time integration aborted.

    Carries the last valid trajectory (may be None when the failure happens
    before the first record).
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class DensityFloor(SolverBlowup):
    """Density fell below the configured floor; step aborted, no clipping."""


class NonFinite(SolverBlowup):
    """NaN/Inf detected in the evolved fields."""


class DomainLengthDrift(MixflowError):
    """Reconstructed Eulerian domain length drifted too far from 1."""


class EmptyTrajectory(MixflowError):
    pass


class FileFormatError(MixflowError):
    pass


class ParseError(MixflowError):
    """Config text could not be parsed; message carries location context."""
