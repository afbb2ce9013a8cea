"""Exception hierarchy shared by every module of the package."""


class EraserError(Exception):
    """Base class for all errors raised by this package."""


class NotNormalized(EraserError, ValueError):
    pass


class FootprintMismatch(EraserError, ValueError):
    pass


class DuplicateRegister(EraserError, ValueError):
    pass


class ZeroProbabilityBranch(EraserError):
    """A post-selection was requested on a branch the state never reaches."""


class InvalidDensityMatrix(EraserError, ValueError):
    pass


class ParameterOutOfRange(EraserError, ValueError):
    pass


class ProbabilityNotNormalized(EraserError, ValueError):
    pass


class EmptyTable(EraserError, ValueError):
    pass


class RankDeficientRecord(EraserError, ValueError):
    pass
