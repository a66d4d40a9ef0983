"""Exception hierarchy.

Every domain rejection derives from ``MajorReachError`` so the CLI can map it
to exit code 1 by class name.
"""


class MajorReachError(Exception):
    """Base class for all domain errors raised by the package."""


class NotHermitian(MajorReachError):
    pass


class NotUnitary(MajorReachError):
    pass


class NotNormal(MajorReachError):
    pass


class NotAntiHermitian(MajorReachError):
    pass


class BadRank(MajorReachError):
    pass


class EmptySet(MajorReachError):
    pass


class DimensionMismatch(MajorReachError):
    pass


class LengthMismatch(DimensionMismatch):
    pass


class NotMajorized(MajorReachError):
    pass


class DegenerateBlock(MajorReachError):
    pass


class ZeroNoise(MajorReachError):
    pass


class NotCollinear(MajorReachError):
    pass


class TooLarge(MajorReachError):
    pass


class BudgetExceeded(MajorReachError):
    pass


class DegeneratePair(MajorReachError):
    pass


class NoDistinctPair(MajorReachError):
    pass


class NotControllable(MajorReachError):
    pass


class NoiseNotUnital(MajorReachError):
    pass


class NotDensityMatrix(MajorReachError):
    pass
