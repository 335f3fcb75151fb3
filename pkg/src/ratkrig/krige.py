"""Ordinary, limit and rational kriging plus the inverse-distance baseline.

Rational kriging predicts with

    y(x) = r(x)' R^{-1} diag(R c) y / r(x)' c,

where ``c >= 0`` is chosen by :func:`estimate_c_regularized`. Its GLS
mean is a convex combination of the responses, unlike the ordinary
kriging mean ``1'R^{-1}y / 1'R^{-1}1``.

Fitting standardizes ``y`` internally; everything stored on a fitted
model (``mu``, ``nu2``, ``tau2``) and every prediction is reported in the
original units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from ratkrig.errors import (
    DegenerateDenominator,
    DegenerateScale,
    InsufficientData,
    InternalError,
    NotPositiveDefinite,
    ZeroWeight,
)
from ratkrig.kernels import (
    DEFAULT_NUGGET,
    DataSet,
    KernelSpec,
    as_points,
    corr_matrix,
    log_cross_corr,
)
from ratkrig.linalg import (
    SpdFactor,
    dominant_eigenpair,
    half_solve,
    log_det,
    spd_factor,
    spd_solve,
)
from ratkrig.optimize import OptimizerConfig, multistart_minimize

EPS_GUARD = 1e-12
FEASIBILITY_TOL = 1e-12
GAMMA_GRID_SIZE = 1001
GAMMA_TOL = 1e-6

_TINY = np.finfo(float).tiny


# ---------------------------------------------------------------------------
# estimation of c and the GLS means
# ---------------------------------------------------------------------------


def estimate_c_regularized(
    R, delta: float | None = None, grid_size: int = GAMMA_GRID_SIZE, tol: float = GAMMA_TOL
) -> tuple[np.ndarray, float, float]:
    """Nonnegative coefficient vector ``c = [(1-g) R + g I]^{-1} 1``.

    ``g`` is the smallest value in ``[0, 1]`` for which every entry of
    ``c`` is at least ``delta``. The default ``delta`` is the largest
    eigenvalue of ``R`` divided by ``n``, capped at 1 so that ``g = 1``
    (``c = 1``) is always feasible even with a nugget on the diagonal.

    Feasibility need not be monotone in ``g``, so the whole grid of
    ``grid_size`` values is checked and the first feasible grid value is
    refined by bisection against its left neighbour down to ``tol``.

    Returns
    -------
    c : ndarray
    gamma : float
    delta : float
    """
    R = np.asarray(R, dtype=float)
    n = R.shape[0]
    lam, Q = np.linalg.eigh(0.5 * (R + R.T))
    if delta is None:
        delta = min(lam[-1] / n, 1.0)
    q1 = Q.T @ np.ones(n)

    def solve(g):
        return Q @ (q1 / ((1.0 - g) * lam + g))

    def feasible(c):
        return np.all(c >= delta - FEASIBILITY_TOL, axis=0)

    gammas = np.linspace(0.0, 1.0, grid_size)
    denom = (1.0 - gammas)[None, :] * lam[:, None] + gammas[None, :]
    ok = feasible(Q @ (q1[:, None] / denom))
    if not ok.any():
        raise InternalError(f"no feasible gamma for delta={delta}; R is malformed")
    k = int(np.argmax(ok))
    if k == 0:
        gamma = 0.0
    else:
        lo, hi = gammas[k - 1], gammas[k]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if feasible(solve(mid)):
                hi = mid
            else:
                lo = mid
        gamma = float(hi)
    return solve(gamma), gamma, float(delta)


def estimate_c_eigen(R) -> np.ndarray:
    """Perron eigenvector of ``R``, the unit ``c`` maximizing ``c'Rc``."""
    return dominant_eigenpair(R).e1


def rk_weights(R, c) -> np.ndarray:
    """Convex weights ``c_i (Rc)_i / c'Rc`` of the rational-kriging GLS mean."""
    R = np.asarray(R, dtype=float)
    c = np.asarray(c, dtype=float)
    w = c * (R @ c)
    total = w.sum()
    if not total > 0:
        raise ZeroWeight(f"c'Rc = {total} is not positive")
    return w / total


def gls_mean_rk(R, c, y) -> float:
    return float(rk_weights(R, c) @ np.asarray(y, dtype=float))


def gls_mean_ok(R, y) -> float:
    F = R if isinstance(R, SpdFactor) else spd_factor(R)
    y = np.asarray(y, dtype=float)
    b = spd_solve(F, np.column_stack([np.ones_like(y), y]))
    return float(b[:, 1].sum() / b[:, 0].sum())


def nu2_hat(R, c, y, mu: float) -> float:
    """Profile estimate of the rational-GP scale ``nu^2``."""
    R = np.asarray(R, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 2:
        raise InsufficientData("nu^2 needs at least two observations")
    u = (R @ np.asarray(c, dtype=float)) * (y - mu)
    z = half_solve(spd_factor(R), u)
    return float(z @ z / (n - 1))


# ---------------------------------------------------------------------------
# profile likelihoods
# ---------------------------------------------------------------------------


@dataclass
class _RKState:
    R: np.ndarray
    factor: SpdFactor
    c: np.ndarray
    gamma: float
    delta: float
    Rc: np.ndarray
    mu: float
    nu2: float
    objective: float


def _rk_state(spec: KernelSpec, X, y, delta=None) -> _RKState:
    n = y.size
    R = corr_matrix(spec, X)
    F = spd_factor(R)
    c, gamma, delta = estimate_c_regularized(R, delta)
    Rc = R @ c
    if np.any(Rc <= 0):
        raise InternalError("R c has non-positive entries")
    mu = gls_mean_rk(R, c, y)
    z = half_solve(F, Rc * (y - mu))
    nu2 = float(z @ z / (n - 1)) if n > 1 else 0.0
    obj = (
        (n - 1) * np.log(max(nu2, _TINY))
        + log_det(F)
        - 2.0 * np.sum(np.log(Rc))
        + np.log(c @ Rc)
    )
    return _RKState(R, F, c, gamma, delta, Rc, mu, nu2, float(obj))


def rk_profile_objective(
    theta, X, y, family: str = "gaussian", nugget: float = DEFAULT_NUGGET, delta=None
) -> float:
    """Negative profile log-likelihood (up to constants) of the rational GP.

    Returns ``inf`` when the correlation matrix cannot be factorized.
    """
    spec = KernelSpec(family, theta, nugget)
    try:
        return _rk_state(spec, np.asarray(X, float), np.asarray(y, float), delta).objective
    except (NotPositiveDefinite, np.linalg.LinAlgError, InternalError):
        return np.inf


@dataclass
class _OKState:
    R: np.ndarray
    factor: SpdFactor
    rinv1: np.ndarray
    mu: float
    tau2: float
    objective: float


def _ok_state(spec: KernelSpec, X, y) -> _OKState:
    n = y.size
    R = corr_matrix(spec, X)
    F = spd_factor(R)
    rinv1 = spd_solve(F, np.ones(n))
    mu = float(rinv1 @ y / rinv1.sum())
    z = half_solve(F, y - mu)
    tau2 = float(z @ z / n)
    obj = n * np.log(max(tau2, _TINY)) + log_det(F)
    return _OKState(R, F, rinv1, mu, tau2, float(obj))


def ok_profile_objective(theta, X, y, family: str = "gaussian", nugget: float = DEFAULT_NUGGET) -> float:
    spec = KernelSpec(family, theta, nugget)
    try:
        return _ok_state(spec, np.asarray(X, float), np.asarray(y, float)).objective
    except (NotPositiveDefinite, np.linalg.LinAlgError):
        return np.inf


# ---------------------------------------------------------------------------
# fitted models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Prediction:
    """Posterior mean and standard deviation at a batch of query points.

    ``sd_scale`` is the prior standard deviation at each point: the
    constant ``tau`` for ordinary kriging, ``nu / r(x)'c`` for rational
    kriging.
    """

    mean: np.ndarray
    sd: np.ndarray
    sd_scale: np.ndarray

    def interval(self, alpha: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
        z = norm.ppf(1.0 - alpha / 2.0)
        return self.mean - z * self.sd, self.mean + z * self.sd


def _standardize(y: np.ndarray) -> tuple[np.ndarray, float, float]:
    center = float(np.mean(y))
    scale = float(np.std(y))
    if not scale > 0:
        scale = 1.0
    return (y - center) / scale, center, scale


@dataclass(frozen=True)
class FittedRK:
    spec: KernelSpec
    data: DataSet
    c_hat: np.ndarray
    gamma_hat: float
    delta: float
    mu: float
    nu2: float
    factor: SpdFactor = field(repr=False)
    y_center: float = 0.0
    y_scale: float = 1.0
    objective: float = float("nan")
    weights: np.ndarray = field(default=None, repr=False)

    def predict(self, x) -> Prediction:
        return predict_rk(self, x)


@dataclass(frozen=True)
class FittedOK:
    spec: KernelSpec
    data: DataSet
    mu_ok: float
    tau2: float
    factor: SpdFactor = field(repr=False)
    kriging_weights: np.ndarray = field(default=None, repr=False)
    rinv1: np.ndarray = field(default=None, repr=False)
    y_center: float = 0.0
    y_scale: float = 1.0
    objective: float = float("nan")

    def predict(self, x) -> Prediction:
        return predict_ok(self, x)


def _resolve_theta(objective, data, config, lengthscales, constant):
    if lengthscales is not None:
        theta = np.broadcast_to(np.asarray(lengthscales, dtype=float), (data.p,))
        return theta.copy()
    config = config or OptimizerConfig()
    if constant:
        # flat likelihood; keep the first start point
        return np.full(data.p, 0.5)
    z, _ = multistart_minimize(objective, data.p, config)
    return 10.0**z


def build_rk(
    data: DataSet, spec: KernelSpec, delta: float | None = None
) -> FittedRK:
    """Assemble a rational-kriging model at fixed kernel parameters."""
    ys, center, scale = _standardize(data.y)
    st = _rk_state(spec, data.X, ys, delta)
    weights = spd_solve(st.factor, st.Rc * ys)
    return FittedRK(
        spec=spec,
        data=data,
        c_hat=st.c,
        gamma_hat=st.gamma,
        delta=st.delta,
        mu=gls_mean_rk(st.R, st.c, data.y),
        nu2=st.nu2 * scale**2,
        factor=st.factor,
        y_center=center,
        y_scale=scale,
        objective=st.objective,
        weights=weights,
    )


def fit_rk(
    data: DataSet,
    family: str = "gaussian",
    config: OptimizerConfig | None = None,
    lengthscales=None,
    nugget: float = DEFAULT_NUGGET,
    delta: float | None = None,
) -> FittedRK:
    """Fit a rational-kriging model, estimating length-scales by profile MLE.

    Pass ``lengthscales`` to skip the search and fit at fixed values.

    Raises
    ------
    OptimizerFailure
        The correlation matrix could not be factorized at any start.
    """
    ys, _, _ = _standardize(data.y)

    def objective(z):
        return rk_profile_objective(10.0**z, data.X, ys, family, nugget, delta)

    theta = _resolve_theta(objective, data, config, lengthscales, np.ptp(data.y) == 0)
    return build_rk(data, KernelSpec(family, theta, nugget), delta)


def build_ok(data: DataSet, spec: KernelSpec) -> FittedOK:
    ys, center, scale = _standardize(data.y)
    st = _ok_state(spec, data.X, ys)
    return FittedOK(
        spec=spec,
        data=data,
        mu_ok=center + scale * st.mu,
        tau2=st.tau2 * scale**2,
        factor=st.factor,
        kriging_weights=spd_solve(st.factor, ys - st.mu),
        rinv1=st.rinv1,
        y_center=center,
        y_scale=scale,
        objective=st.objective,
    )


def fit_ok(
    data: DataSet,
    family: str = "gaussian",
    config: OptimizerConfig | None = None,
    lengthscales=None,
    nugget: float = DEFAULT_NUGGET,
) -> FittedOK:
    """Ordinary kriging with GLS mean and profile-MLE length-scales."""
    ys, _, _ = _standardize(data.y)

    def objective(z):
        return ok_profile_objective(10.0**z, data.X, ys, family, nugget)

    theta = _resolve_theta(objective, data, config, lengthscales, np.ptp(data.y) == 0)
    return build_ok(data, KernelSpec(family, theta, nugget))


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------


def query_log_corr(spec: KernelSpec, X, pts) -> tuple[np.ndarray, np.ndarray]:
    """Log cross-correlations for prediction, plus the prior variance per point.

    A query that coincides with a design row gets the zero-lag correlation
    ``1 + nugget`` for that row and prior variance ``1 + nugget``: the
    nugget is part of the process covariance at zero lag, so predictors
    interpolate the data exactly and have zero variance there.
    """
    logr = log_cross_corr(spec, X, pts)
    hit = np.all(pts[:, None, :] == X[None, :, :], axis=-1)
    if hit.any():
        logr = np.where(hit, np.log1p(spec.nugget), logr)
    prior = np.where(hit.any(axis=1), 1.0 + spec.nugget, 1.0)
    return logr, prior


def _scaled_cross_corr(spec: KernelSpec, X, pts) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(r_tilde, m, prior)`` with ``r = exp(m) * r_tilde`` and ``max(r_tilde) = 1`` per row.

    Rational predictors are invariant to rescaling ``r``, so working with
    ``r_tilde`` keeps them defined far from the data where ``r`` underflows.
    """
    logr, prior = query_log_corr(spec, X, pts)
    m = logr.max(axis=1)
    return np.exp(logr - m[:, None]), m, prior


def predict_rk(model: FittedRK, x) -> Prediction:
    """Posterior mean and sd of the rational GP.

    Raises
    ------
    DegenerateScale
        ``r(x)'c`` (after rescaling so the largest correlation is one)
        is at or below ``EPS_GUARD``.
    """
    pts = as_points(x, model.data.p)
    rt, m, prior = _scaled_cross_corr(model.spec, model.data.X, pts)
    den = rt @ model.c_hat
    if np.any(den <= EPS_GUARD):
        raise DegenerateScale(f"r(x)'c = {den.min():.3e} <= {EPS_GUARD}")
    mean = (rt @ model.weights) / den

    z = half_solve(model.factor, rt.T)
    quad = np.sum(z * z, axis=0)
    nu2s = model.nu2 / model.y_scale**2
    with np.errstate(over="ignore", invalid="ignore"):
        var = nu2s * np.clip(prior * np.exp(-2.0 * m) - quad, 0.0, None) / den**2
        sd_scale = np.sqrt(nu2s) * np.exp(-m) / den
    var = np.where(np.isnan(var), 0.0, var)
    return Prediction(
        mean=model.y_center + model.y_scale * mean,
        sd=model.y_scale * np.sqrt(var),
        sd_scale=model.y_scale * sd_scale,
    )


def predict_ok(model: FittedOK, x) -> Prediction:
    """Ordinary kriging mean and sd, including the GLS mean-uncertainty term."""
    pts = as_points(x, model.data.p)
    logr, prior = query_log_corr(model.spec, model.data.X, pts)
    r = np.exp(logr)
    mu = (model.mu_ok - model.y_center) / model.y_scale
    mean = mu + r @ model.kriging_weights
    z = half_solve(model.factor, r.T)
    quad = np.sum(z * z, axis=0)
    s = model.rinv1.sum()
    tau2s = model.tau2 / model.y_scale**2
    var = tau2s * np.clip(prior - quad + (1.0 - r @ model.rinv1) ** 2 / s, 0.0, None)
    return Prediction(
        mean=model.y_center + model.y_scale * mean,
        sd=model.y_scale * np.sqrt(var),
        sd_scale=np.full(mean.shape, np.sqrt(model.tau2)),
    )


def predict_limit(data: DataSet, spec: KernelSpec, x) -> np.ndarray:
    """Limit kriging ``r'R^{-1}y / r'R^{-1}1``."""
    pts = as_points(x, data.p)
    F = spd_factor(corr_matrix(spec, data.X))
    b = spd_solve(F, np.column_stack([data.y, np.ones(data.n)]))
    rt, _, _ = _scaled_cross_corr(spec, data.X, pts)
    num = rt @ b[:, 0]
    den = rt @ b[:, 1]
    if np.any(np.abs(den) <= EPS_GUARD):
        raise DegenerateDenominator("r(x)'R^{-1}1 vanishes at a query point")
    return num / den


def predict_idw(data: DataSet, weights, x) -> np.ndarray:
    """Inverse distance weighting with squared weighted norm ``sum w_i h_i^2``.

    A query that coincides with a design point returns that response.
    """
    pts = as_points(x, data.p)
    w = np.broadcast_to(np.asarray(weights, dtype=float), (data.p,))
    d2 = np.sum(w * (pts[:, None, :] - data.X[None, :, :]) ** 2, axis=-1)
    out = np.empty(pts.shape[0])
    for k, row in enumerate(d2):
        hit = row == 0.0
        if hit.any():
            out[k] = data.y[np.argmax(hit)]
        else:
            a = row.min() / row
            out[k] = a @ data.y / a.sum()
    return out


def idw_weights(spec: KernelSpec) -> np.ndarray:
    """Norm weights ``w_i`` implied by a kernel's length-scales."""
    return spec.weighted_norm_view()[1]
