"""Exception hierarchy shared across the package."""


class MomentProblemError(Exception):
    """Base class for all errors raised by this package."""


# polynomial layer
class DegreeTooLow(MomentProblemError):
    pass


class NoConvergence(MomentProblemError):
    pass


class InvalidDegree(MomentProblemError):
    pass


# exact linear algebra
class DimensionMismatch(MomentProblemError):
    pass


# permutation / Schur layer
class NotTransitive(MomentProblemError):
    pass


class NotFullCycle(MomentProblemError):
    pass


class NotClosed(MomentProblemError):
    pass


class InvalidDivisor(MomentProblemError):
    pass


# monodromy layer
class DegenerateInput(MomentProblemError):
    pass


class TrackingFailure(MomentProblemError):
    pass


class RelationViolation(MomentProblemError):
    pass


class TreeViolation(MomentProblemError):
    pass


class VertexMismatch(MomentProblemError):
    pass


class DegeneratePath(MomentProblemError):
    pass


# series layer
class NotNormalizable(MomentProblemError):
    pass


class TruncationTooShort(MomentProblemError):
    pass


class RecoveryFailure(MomentProblemError):
    pass


# solver layer
class DecompositionMismatch(MomentProblemError):
    pass


class FactorMissing(MomentProblemError):
    pass


class BlockMismatch(MomentProblemError):
    pass


class NotASolution(MomentProblemError):
    pass


class ResidualNonzero(MomentProblemError):
    pass


# cli layer
class MalformedInput(MomentProblemError):
    pass
