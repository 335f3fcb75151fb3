"""Prediction-quality metrics: RMSE, interval score and leave-one-out CV."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import norm

from ratkrig.errors import RatKrigError
from ratkrig.kernels import DataSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    interval_score: float
    alpha: float
    n_test: int


def rmse(predictions, truths) -> float:
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(truths, dtype=float).ravel()
    if p.size != t.size or p.size == 0:
        raise ValueError(f"length mismatch or empty input ({p.size} vs {t.size})")
    return float(np.sqrt(np.mean((p - t) ** 2)))


def interval_score(lowers, uppers, truths, alpha: float = 0.05) -> float:
    """Mean interval score of central ``(1 - alpha)`` prediction intervals.

    Each point contributes its width plus ``2/alpha`` times the distance
    by which the truth falls outside the interval.
    """
    lo = np.asarray(lowers, dtype=float).ravel()
    hi = np.asarray(uppers, dtype=float).ravel()
    t = np.asarray(truths, dtype=float).ravel()
    if not (lo.size == hi.size == t.size) or t.size == 0:
        raise ValueError("lowers, uppers and truths must have equal, nonzero length")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if np.any(lo > hi):
        raise ValueError("crossed intervals: some lower bound exceeds its upper bound")
    penalty = np.clip(lo - t, 0.0, None) + np.clip(t - hi, 0.0, None)
    return float(np.mean((hi - lo) + (2.0 / alpha) * penalty))


def report(mean, sd, truths, alpha: float = 0.05) -> MetricReport:
    """RMSE and interval score for Gaussian predictive intervals ``mean +/- z sd``."""
    mean = np.asarray(mean, dtype=float)
    z = norm.ppf(1.0 - alpha / 2.0)
    sd = np.asarray(sd, dtype=float)
    return MetricReport(
        rmse=rmse(mean, truths),
        interval_score=interval_score(mean - z * sd, mean + z * sd, truths, alpha),
        alpha=alpha,
        n_test=int(np.size(truths)),
    )


def loocv_predictions(
    fit_fn: Callable, data: DataSet, refit_hyperparameters: bool = False, lengthscales=None
) -> np.ndarray:
    """Leave-one-out predictions ``y_hat_{-i}(x_i)``.

    ``fit_fn(data, lengthscales=None)`` must return a model with a
    ``predict`` method. Unless ``refit_hyperparameters`` is set, the
    length-scales are fitted once on the full data and held fixed, while
    everything else (``c``, means, scales) is re-derived on each fold.
    ``lengthscales`` supplies the fixed values directly instead of fitting
    them. Folds whose fit fails are logged and left as NaN.
    """
    if data.n < 3:
        raise ValueError("leave-one-out needs n >= 3")
    theta = None
    if not refit_hyperparameters:
        theta = lengthscales if lengthscales is not None else fit_fn(data).spec.lengthscales
    out = np.full(data.n, np.nan)
    for i in range(data.n):
        try:
            model = fit_fn(data.drop(i), lengthscales=theta)
            out[i] = model.predict(data.X[i : i + 1]).mean[0]
        except (RatKrigError, np.linalg.LinAlgError) as exc:
            logger.warning("fold %d failed: %s", i, exc)
    return out


def loocv_rmse(
    fit_fn: Callable, data: DataSet, refit_hyperparameters: bool = False, lengthscales=None
) -> float:
    """RMSE of leave-one-out predictions over the folds that succeeded."""
    pred = loocv_predictions(fit_fn, data, refit_hyperparameters, lengthscales)
    good = np.isfinite(pred)
    if not good.any():
        raise RatKrigError("every leave-one-out fold failed")
    if not good.all():
        logger.warning("%d of %d folds failed", int((~good).sum()), data.n)
    return rmse(pred[good], data.y[good])
