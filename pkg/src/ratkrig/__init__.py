"""Rational kriging and rational Gaussian-process regression.

Ordinary, limit and rational kriging predictors, inverse distance
weighting, universal (regression-mean) kriging, linear Kennedy-O'Hagan
calibration and an experiment harness for the simulation studies.
"""

from ratkrig.errors import RatKrigError
from ratkrig.kernels import DataSet, KernelSpec, corr, corr_matrix, cross_corr
from ratkrig.krige import (
    FittedOK,
    FittedRK,
    OptimizerConfig,
    Prediction,
    fit_ok,
    fit_rk,
    predict_idw,
    predict_limit,
    predict_ok,
    predict_rk,
)
from ratkrig.universal import FittedUK, RegressionBasis, fit_uk, predict_uk

__version__ = "0.1.0"

__all__ = [
    "RatKrigError",
    "DataSet",
    "KernelSpec",
    "corr",
    "corr_matrix",
    "cross_corr",
    "FittedOK",
    "FittedRK",
    "OptimizerConfig",
    "Prediction",
    "fit_ok",
    "fit_rk",
    "predict_idw",
    "predict_limit",
    "predict_ok",
    "predict_rk",
    "FittedUK",
    "RegressionBasis",
    "fit_uk",
    "predict_uk",
]
