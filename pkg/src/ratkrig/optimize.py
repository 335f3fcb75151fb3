"""Bounded multi-start Nelder-Mead over log10 length-scales."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from ratkrig.errors import OptimizerFailure

logger = logging.getLogger(__name__)

# stands in for non-finite objective values; finite so the simplex test stays defined
PENALTY = 1e100


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for the length-scale search.

    The search runs over ``log10(theta_i)`` inside ``log10_bounds``. The
    first start sits at ``theta_i = 0.5`` (half the unit-cube range); the
    remaining ``n_starts - 1`` come from a scrambled Halton draw seeded
    with ``seed``.
    """

    log10_bounds: tuple[float, float] = (-2.0, 2.0)
    n_starts: int = 5
    max_evals: int = 500
    seed: int = 0
    initial_step: float = 0.5
    xatol: float = 1e-4
    fatol: float = 1e-8

    def __post_init__(self):
        lo, hi = self.log10_bounds
        if not lo < hi:
            raise ValueError("log10_bounds must satisfy lo < hi")
        if self.n_starts < 1 or self.max_evals < 1:
            raise ValueError("n_starts and max_evals must be >= 1")


def start_points(p: int, config: OptimizerConfig) -> np.ndarray:
    lo, hi = config.log10_bounds
    first = np.clip(np.full(p, np.log10(0.5)), lo, hi)
    if config.n_starts == 1:
        return first[None, :]
    sampler = qmc.Halton(d=p, scramble=True, seed=config.seed)
    rest = qmc.scale(sampler.random(config.n_starts - 1), [lo] * p, [hi] * p)
    return np.vstack([first, rest])


def _simplex(x0: np.ndarray, step: float, lo: float, hi: float) -> np.ndarray:
    p = x0.size
    S = np.tile(x0, (p + 1, 1))
    for i in range(p):
        # step inward when the outward vertex would leave the box
        S[i + 1, i] += step if x0[i] + step <= hi else -step
    return S


def multistart_minimize(
    objective: Callable[[np.ndarray], float], p: int, config: OptimizerConfig
) -> tuple[np.ndarray, float]:
    """Minimize ``objective`` over the box ``log10_bounds ** p``.

    Non-finite objective values are treated as infeasible. Returns the best
    ``(x, f)`` across starts; ties keep the earliest start.

    Raises
    ------
    OptimizerFailure
        Every evaluation at every start was non-finite.
    """
    lo, hi = config.log10_bounds
    bounds = [(lo, hi)] * p

    def safe(z):
        val = objective(np.clip(z, lo, hi))
        return float(val) if np.isfinite(val) and val < PENALTY else PENALTY

    best_x, best_f = None, np.inf
    for x0 in start_points(p, config):
        res = minimize(
            safe,
            x0,
            method="Nelder-Mead",
            bounds=bounds,
            options={
                "maxfev": config.max_evals,
                "initial_simplex": _simplex(x0, config.initial_step, lo, hi),
                "xatol": config.xatol,
                "fatol": config.fatol,
            },
        )
        if res.fun < PENALTY and res.fun < best_f:
            best_x, best_f = np.clip(res.x, lo, hi), float(res.fun)
    if best_x is None:
        raise OptimizerFailure("objective was non-finite at every start")
    logger.debug("best log10 theta %s, objective %.6g", best_x, best_f)
    return best_x, best_f
