"""Exception types shared across the package."""


class PvbsError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(PvbsError):
    pass


class EmptyRegion(PvbsError):
    pass


class ZeroNormal(PvbsError):
    pass


class DegenerateNormal(PvbsError):
    pass


class InvalidDirection(PvbsError):
    pass


class GaplessBulk(PvbsError):
    """All lambda_j = 1: the bulk model is gapless, no bound is produced."""


class GaplessDirection(PvbsError):
    """m is aligned with -log(lambda): the edge gap vanishes, no lower bound exists."""


class SectorTooLarge(PvbsError):
    pass


class RegionTooLarge(PvbsError):
    pass


class SolverFailure(PvbsError):
    pass


class DisconnectedVolume(PvbsError):
    pass


class StageOutOfRange(PvbsError):
    pass


class CaseMismatch(PvbsError):
    pass


class TildeLambdaUnity(PvbsError):
    pass


class NoFeasibleEll(PvbsError):
    pass


class HypothesisViolated(PvbsError):
    pass


class UndefinedAngle(PvbsError):
    pass


class AllZero(PvbsError):
    pass
