"""SPD factorization helpers and the dominant (Perron) eigenpair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ratkrig.errors import NegativeEntry, NonConvergence, NotPositiveDefinite


@dataclass(frozen=True)
class SpdFactor:
    """Lower Cholesky factor ``L`` with ``A = L @ L.T``."""

    L: np.ndarray

    @property
    def n(self) -> int:
        return self.L.shape[0]


@dataclass(frozen=True)
class EigenPair:
    lambda1: float
    e1: np.ndarray


def spd_factor(A) -> SpdFactor:
    """Cholesky-factor a symmetric positive-definite matrix.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is non-positive, typically because the length-scale is
        too large for the nugget or the design has near-duplicate rows.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    try:
        L = sla.cholesky(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if not np.all(np.diag(L) > 0):
        raise NotPositiveDefinite("non-positive pivot")
    L.setflags(write=False)
    return SpdFactor(L)


def spd_solve(F: SpdFactor, b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape[0] != F.n:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, factor is {F.n} x {F.n}")
    return sla.cho_solve((F.L, True), b, check_finite=False)


def half_solve(F: SpdFactor, b) -> np.ndarray:
    """Return ``L^{-1} b``, so that ``b' A^{-1} b = ||L^{-1} b||^2``."""
    b = np.asarray(b, dtype=float)
    return sla.solve_triangular(F.L, b, lower=True, check_finite=False)


def log_det(F: SpdFactor) -> float:
    return float(2.0 * np.sum(np.log(np.diag(F.L))))


def dominant_eigenpair(R, tol: float = 1e-12, max_iter: int = 10_000) -> EigenPair:
    """Largest eigenvalue and its unit eigenvector by power iteration.

    Iteration starts from the all-ones vector, which for an entrywise
    positive matrix has a positive projection on the Perron vector. If the
    top eigenvalue is repeated the iteration settles on the projection of
    the start vector onto that eigenspace.

    Raises
    ------
    NonConvergence
        Successive iterates still differ by ``tol`` (infinity norm) after
        ``max_iter`` steps.
    NegativeEntry
        The converged vector has an entry below ``-1e-12``.
    """
    R = np.asarray(R, dtype=float)
    n = R.shape[0]
    if R.ndim != 2 or R.shape != (n, n) or n < 1:
        raise ValueError(f"expected a square matrix, got shape {R.shape}")
    v = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        w = R @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            raise NonConvergence("iterate collapsed to zero")
        w /= norm
        if np.max(np.abs(w - v)) < tol:
            v = w
            break
        v = w
    else:
        raise NonConvergence(f"power iteration did not converge in {max_iter} steps")

    if v.sum() < 0:
        v = -v
    if np.any(v < -1e-12):
        raise NegativeEntry(f"dominant eigenvector has entry {v.min():.3e} < 0")
    v = np.clip(v, 0.0, None)
    v /= np.linalg.norm(v)
    lam = float(v @ R @ v)
    return EigenPair(lam, v)
