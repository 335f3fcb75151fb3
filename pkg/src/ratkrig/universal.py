"""Universal kriging and its rational version.

The mean is a linear model ``beta' f(x)`` over a user-supplied basis. In
the rational variant the stochastic part is scaled by ``nu / r(x)'c``, so
the observations have covariance ``nu^2 Sigma`` with
``Sigma = diag(1/Rc) R diag(1/Rc)``. The plain variant has ``Sigma = R``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from ratkrig.errors import (
    DegenerateScale,
    InsufficientData,
    NotPositiveDefinite,
    RankDeficient,
)
from ratkrig.kernels import DEFAULT_NUGGET, DataSet, KernelSpec, as_points, corr_matrix
from ratkrig.krige import (
    EPS_GUARD,
    Prediction,
    _resolve_theta,
    _scaled_cross_corr,
    query_log_corr,
    estimate_c_regularized,
)
from ratkrig.linalg import SpdFactor, half_solve, log_det, spd_factor, spd_solve
from ratkrig.optimize import OptimizerConfig

VARIANTS = ("plain", "rational")
RANK_TOL = 1e-10

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class RegressionBasis:
    """Ordered scalar functions ``f_0..f_m``; each maps an (n, p) array to (n,).

    ``kind`` names the built-in bases (``"constant"``, ``"linear"``) so
    that fitted models using them can be saved; user bases are ``"custom"``.
    """

    functions: tuple
    kind: str = "custom"
    dim: int | None = None

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        cols = [np.broadcast_to(np.asarray(f(X), dtype=float), (X.shape[0],)) for f in self.functions]
        return np.column_stack(cols)

    @property
    def size(self) -> int:
        return len(self.functions)

    @classmethod
    def constant(cls) -> "RegressionBasis":
        return cls((lambda X: np.ones(X.shape[0]),), kind="constant")

    @classmethod
    def linear(cls, p: int) -> "RegressionBasis":
        """Intercept plus ``x_j - 0.5`` for each coordinate."""
        fs = [lambda X: np.ones(X.shape[0])]
        fs += [(lambda X, j=j: X[:, j] - 0.5) for j in range(p)]
        return cls(tuple(fs), kind="linear", dim=p)

    @classmethod
    def from_callables(cls, functions: Sequence[Callable]) -> "RegressionBasis":
        return cls(tuple(functions))


def check_full_rank(F: np.ndarray, tol: float = RANK_TOL) -> None:
    r = np.abs(np.diag(sla.qr(F, mode="r")[0]))
    if r.size == 0 or r.min() <= tol * max(r.max(), 1.0):
        raise RankDeficient(f"model matrix of shape {F.shape} is rank deficient")


@dataclass
class _UKState:
    factor: SpdFactor
    c: np.ndarray | None
    gamma: float | None
    delta: float | None
    d: np.ndarray
    beta: np.ndarray
    nu2: float
    M_factor: SpdFactor
    objective: float


def _uk_state(spec: KernelSpec, X, y, Fm, variant: str, delta=None) -> _UKState:
    n, k = Fm.shape
    R = corr_matrix(spec, X)
    L = spd_factor(R)
    if variant == "rational":
        c, gamma, delta = estimate_c_regularized(R, delta)
        d = R @ c
    else:
        c = gamma = delta = None
        d = np.ones(n)
    # Sigma^{-1} = D R^{-1} D with D = diag(d)
    A = half_solve(L, d[:, None] * Fm)
    b = half_solve(L, d * y)
    M = A.T @ A
    try:
        Mf = spd_factor(M)
    except NotPositiveDefinite:
        raise RankDeficient("F' Sigma^{-1} F is singular") from None
    beta = spd_solve(Mf, A.T @ b)
    e = b - A @ beta
    nu2 = float(e @ e / (n - k))
    obj = (n - k) * np.log(max(nu2, _TINY)) + log_det(L) + log_det(Mf)
    if variant == "rational":
        obj -= 2.0 * np.sum(np.log(d))
    return _UKState(L, c, gamma, delta, d, beta, nu2, Mf, float(obj))


def uk_profile_objective(
    theta, X, y, Fm, variant="rational", family="gaussian", nugget=DEFAULT_NUGGET, delta=None
) -> float:
    spec = KernelSpec(family, theta, nugget)
    try:
        return _uk_state(spec, X, y, Fm, variant, delta).objective
    except (NotPositiveDefinite, RankDeficient, np.linalg.LinAlgError):
        return np.inf


@dataclass(frozen=True)
class FittedUK:
    basis: RegressionBasis
    spec: KernelSpec
    data: DataSet
    variant: str
    beta_hat: np.ndarray
    nu2: float
    c_hat: np.ndarray | None
    gamma_hat: float | None
    delta: float | None
    factor: SpdFactor = field(repr=False)
    M_factor: SpdFactor = field(default=None, repr=False)
    y_scale: float = 1.0
    objective: float = float("nan")
    resid_weights: np.ndarray = field(default=None, repr=False)
    G: np.ndarray = field(default=None, repr=False)

    def predict(self, x, as_printed: bool = False) -> Prediction:
        return predict_uk(self, x, as_printed)


def build_uk(data: DataSet, basis: RegressionBasis, spec: KernelSpec, variant="rational", delta=None) -> FittedUK:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    Fm = basis(data.X)
    scale = float(np.std(data.y)) or 1.0
    ys = data.y / scale
    st = _uk_state(spec, data.X, ys, Fm, variant, delta)
    resid = spd_solve(st.factor, st.d * (ys - Fm @ st.beta))
    G = spd_solve(st.factor, st.d[:, None] * Fm)
    return FittedUK(
        basis=basis,
        spec=spec,
        data=data,
        variant=variant,
        beta_hat=scale * st.beta,
        nu2=st.nu2 * scale**2,
        c_hat=st.c,
        gamma_hat=st.gamma,
        delta=st.delta,
        factor=st.factor,
        M_factor=st.M_factor,
        y_scale=scale,
        objective=st.objective,
        resid_weights=resid,
        G=G,
    )


def fit_uk(
    data: DataSet,
    basis: RegressionBasis,
    family: str = "gaussian",
    variant: str = "rational",
    config: OptimizerConfig | None = None,
    lengthscales=None,
    nugget: float = DEFAULT_NUGGET,
    delta: float | None = None,
) -> FittedUK:
    """Fit (rational) universal kriging by empirical Bayes.

    Raises
    ------
    RankDeficientBasis
        The basis evaluated on the design is not of full column rank.
    InsufficientData
        Fewer than ``m + 3`` observations for an ``m + 1`` term basis.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    Fm = basis(data.X)
    if data.n < Fm.shape[1] + 2:
        raise InsufficientData(f"need n >= {Fm.shape[1] + 2} for a {Fm.shape[1]}-term basis")
    check_full_rank(Fm)
    scale = float(np.std(data.y)) or 1.0
    ys = data.y / scale

    def objective(z):
        return uk_profile_objective(10.0**z, data.X, ys, Fm, variant, family, nugget, delta)

    theta = _resolve_theta(objective, data, config, lengthscales, np.ptp(data.y) == 0)
    return build_uk(data, basis, KernelSpec(family, theta, nugget), variant, delta)



def predict_uk(model: FittedUK, x, as_printed: bool = False) -> Prediction:
    """Posterior mean and sd of (rational) universal kriging.

    The mean is ``f(x)'beta`` plus the GLS residual-interpolation term, so
    the predictor interpolates and reduces to rational kriging for the
    constant basis. ``as_printed=True`` drops the residual term and returns
    the regression part alone.
    """
    pts = as_points(x, model.data.p)
    f = model.basis(pts)
    if model.variant == "rational":
        rt, m, prior = _scaled_cross_corr(model.spec, model.data.X, pts)
        den = rt @ model.c_hat
        if np.any(den <= EPS_GUARD):
            raise DegenerateScale(f"r(x)'c = {den.min():.3e} <= {EPS_GUARD}")
    else:
        logr, prior = query_log_corr(model.spec, model.data.X, pts)
        rt = np.exp(logr)
        m = np.zeros(pts.shape[0])
        den = np.ones(pts.shape[0])

    beta_s = model.beta_hat / model.y_scale
    mean = f @ beta_s
    if not as_printed:
        mean = mean + (rt @ model.resid_weights) / den

    h = f - (rt @ model.G) / den[:, None]
    hz = half_solve(model.M_factor, h.T)
    z = half_solve(model.factor, rt.T)
    quad = np.sum(z * z, axis=0)
    nu2s = model.nu2 / model.y_scale**2
    with np.errstate(over="ignore", invalid="ignore"):
        first = np.clip(prior * np.exp(-2.0 * m) - quad, 0.0, None) / den**2
        var = nu2s * (first + np.sum(hz * hz, axis=0))
        sd_scale = np.sqrt(nu2s) * np.exp(-m) / den
    var = np.where(np.isnan(var), 0.0, var)
    return Prediction(
        mean=model.y_scale * mean,
        sd=model.y_scale * np.sqrt(var),
        sd_scale=model.y_scale * sd_scale,
    )
