"""Exception hierarchy shared by every module."""

import numpy as np


class RatKrigError(Exception):
    """Base class for all errors raised by ratkrig."""


class NotPositiveDefinite(RatKrigError, np.linalg.LinAlgError):
    """Cholesky factorization failed; the matrix is numerically indefinite."""


class NonConvergence(RatKrigError):
    pass


class NegativeEntry(RatKrigError):
    pass


class InternalError(RatKrigError):
    pass


class ZeroWeight(RatKrigError):
    pass


class InsufficientData(RatKrigError):
    pass


class DegenerateScale(RatKrigError):
    """The rational denominator r(x)'c fell below the guard value."""


class DegenerateDenominator(RatKrigError):
    pass


class OptimizerFailure(RatKrigError):
    pass


class RankDeficient(RatKrigError):
    pass


RankDeficientBasis = RankDeficient


class EmptyGrid(RatKrigError):
    pass


class ConfigError(RatKrigError):
    pass


class ModelFileError(RatKrigError):
    pass


class VersionError(ModelFileError):
    pass
