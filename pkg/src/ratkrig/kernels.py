"""Stationary correlation functions and the matrices built from them.

All families are written in terms of scaled lags ``h_i / theta_i``. The
gaussian and rational-quadratic kernels use the weighted squared norm
``sum((h_i / theta_i)**2)``; matern32 and exponential are tensor products
of their one-dimensional forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("gaussian", "rational_quadratic", "matern32", "exponential")

ALIASES = {
    "gaussian": "gaussian",
    "gauss": "gaussian",
    "rational_quadratic": "rational_quadratic",
    "rq": "rational_quadratic",
    "cauchy": "rational_quadratic",
    "matern32": "matern32",
    "matern": "matern32",
    "exponential": "exponential",
    "exp": "exponential",
}

DEFAULT_NUGGET = 1e-6
MAX_NUGGET = 1e-2

_SQRT3 = np.sqrt(3.0)


def canonical_family(name: str) -> str:
    try:
        return ALIASES[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown kernel family {name!r}; choose from {sorted(ALIASES)}"
        ) from None


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class KernelSpec:
    """Correlation family, per-dimension length-scales and diagonal nugget.

    Parameters
    ----------
    family : str
        One of :data:`FAMILIES` (aliases such as ``"rq"`` are accepted).
    lengthscales : array_like
        Strictly positive length-scale per input dimension.
    nugget : float
        Added to the diagonal of correlation matrices, in ``[0, 1e-2]``.
    """

    family: str
    lengthscales: np.ndarray
    nugget: float = DEFAULT_NUGGET

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))
        theta = _frozen(np.atleast_1d(self.lengthscales))
        if theta.ndim != 1 or theta.size == 0:
            raise ValueError("lengthscales must be a non-empty vector")
        if not np.all(np.isfinite(theta)) or np.any(theta <= 0):
            raise ValueError(f"lengthscales must be finite and > 0, got {theta}")
        object.__setattr__(self, "lengthscales", theta)
        if not (0.0 <= self.nugget <= MAX_NUGGET):
            raise ValueError(f"nugget must lie in [0, {MAX_NUGGET}], got {self.nugget}")

    @property
    def dim(self) -> int:
        return self.lengthscales.size

    def with_lengthscales(self, lengthscales) -> "KernelSpec":
        return KernelSpec(self.family, lengthscales, self.nugget)

    def weighted_norm_view(self) -> tuple[float, np.ndarray]:
        """Return ``(theta, w)`` with ``theta_i**2 = theta**2 / w_i`` and ``sum(w) = 1``."""
        inv2 = 1.0 / self.lengthscales**2
        theta = 1.0 / np.sqrt(inv2.sum())
        return float(theta), inv2 * theta**2


@dataclass(frozen=True)
class DataSet:
    """Design matrix ``X`` (n x p, unit-cube scaled) and responses ``y``."""

    X: np.ndarray
    y: np.ndarray = field(repr=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"X must be n x p with n, p >= 1, got shape {X.shape}")
        if y.size != X.shape[0]:
            raise ValueError(f"y has {y.size} entries but X has {X.shape[0]} rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("X and y must be finite")
        if np.unique(X, axis=0).shape[0] != X.shape[0]:
            raise ValueError("rows of X must be pairwise distinct")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def drop(self, i: int) -> "DataSet":
        keep = np.arange(self.n) != i
        return DataSet(self.X[keep], self.y[keep])


def _scaled_lags(spec: KernelSpec, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    # (m, k, p) array of |u - v| / theta
    return np.abs(U[:, None, :] - V[None, :, :]) / spec.lengthscales


def log_corr_lags(family: str, S: np.ndarray) -> np.ndarray:
    """Log-correlation from scaled absolute lags ``S`` (last axis = dimension)."""
    if family == "gaussian":
        return -np.sum(S**2, axis=-1)
    if family == "rational_quadratic":
        return -np.log1p(np.sum(S**2, axis=-1))
    if family == "matern32":
        t = _SQRT3 * S
        return np.sum(np.log1p(t) - t, axis=-1)
    if family == "exponential":
        return -np.sum(S, axis=-1)
    raise ValueError(f"unknown family {family!r}")


def corr_lags(family: str, S: np.ndarray) -> np.ndarray:
    if family == "rational_quadratic":
        return 1.0 / (1.0 + np.sum(S**2, axis=-1))
    return np.exp(log_corr_lags(family, S))


def _check_point(spec: KernelSpec, u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (spec.dim,):
        raise ValueError(f"point has shape {u.shape}, kernel expects ({spec.dim},)")
    if not np.all(np.isfinite(u)):
        raise ValueError("point coordinates must be finite")
    return u


def _check_design(spec: KernelSpec, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[1] != spec.dim:
        raise ValueError(f"design has shape {X.shape}, kernel expects (n, {spec.dim})")
    if not np.all(np.isfinite(X)):
        raise ValueError("design coordinates must be finite")
    return X


def as_points(x, p: int) -> np.ndarray:
    """Coerce query input into an (m, p) array.

    A scalar or a 1-D array is read as a batch of points when ``p == 1``
    and as a single point otherwise.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x[:, None] if p == 1 else x[None, :]
    if x.ndim != 2 or x.shape[1] != p:
        raise ValueError(f"query points have shape {x.shape}, expected (m, {p})")
    if not np.all(np.isfinite(x)):
        raise ValueError("query points must be finite")
    return x


def corr(spec: KernelSpec, u, v) -> float:
    """Correlation ``R(u - v)`` between two points."""
    u = _check_point(spec, u)
    v = _check_point(spec, v)
    S = np.abs(u - v) / spec.lengthscales
    return float(corr_lags(spec.family, S))


def corr_matrix(spec: KernelSpec, X) -> np.ndarray:
    """n x n correlation matrix with the nugget added to the diagonal."""
    X = _check_design(spec, X)
    R = corr_lags(spec.family, _scaled_lags(spec, X, X))
    R = 0.5 * (R + R.T)
    R[np.diag_indices_from(R)] = 1.0 + spec.nugget
    return R


def cross_corr(spec: KernelSpec, X, x) -> np.ndarray:
    """Nugget-free correlations between ``x`` and each design row.

    For a single point returns a length-n vector; for an (m, p) batch
    returns an (m, n) matrix.
    """
    X = _check_design(spec, X)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and x.size == spec.dim)
    pts = as_points(x.reshape(1, -1) if single else x, spec.dim)
    out = corr_lags(spec.family, _scaled_lags(spec, pts, X))
    return out[0] if single else out


def log_cross_corr(spec: KernelSpec, X, pts) -> np.ndarray:
    """(m, n) matrix of log-correlations; finite even where ``cross_corr`` underflows."""
    X = _check_design(spec, X)
    pts = as_points(pts, spec.dim)
    return log_corr_lags(spec.family, _scaled_lags(spec, pts, X))
