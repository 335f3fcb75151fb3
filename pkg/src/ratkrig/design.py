"""Experimental designs.

Random designs draw from numpy's PCG64 generator. Replication streams are
derived from a master seed by ``SeedSequence`` spawn keys, so a
replication's draws do not depend on how many other replications run or
in which process.
"""

from __future__ import annotations

import numpy as np


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(replication,))))


def design_uniform(n: int, p: int, seed) -> np.ndarray:
    """``n`` iid uniform points in ``(0, 1)^p``.

    ``seed`` is an int or an existing ``numpy.random.Generator``.
    """
    if n < 1 or p < 1:
        raise ValueError("n and p must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.uniform(size=(n, p))


def design_rescale_endpoints(points) -> np.ndarray:
    """Affinely map 1-D points so the smallest becomes 0 and the largest 1."""
    x = np.asarray(points, dtype=float).ravel()
    lo, hi = x.min(), x.max()
    if not hi > lo:
        raise ValueError("need at least two distinct points")
    out = (x - lo) / (hi - lo)
    out[x == lo] = 0.0
    out[x == hi] = 1.0
    return out


def design_equispaced(n: int, a: float = 0.0, b: float = 1.0) -> np.ndarray:
    if n < 2:
        raise ValueError("n must be >= 2")
    return np.linspace(a, b, n)
