"""Closed-form test functions and their uniform-measure means.

Every function is registered by name in :data:`REGISTRY`. The harness
looks functions up there, so additional ones (Dette-Pepelyshev, piston,
OTL, ...) can be plugged in with :func:`register`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class TestFunction:
    """A test function on a box, with an affine map from the unit cube.

    ``func`` takes an (n, p) array of native-scale inputs and returns (n,).
    """

    __test__ = False  # not a pytest class

    name: str
    dim: int
    lower: tuple
    upper: tuple
    func: Callable[[np.ndarray], np.ndarray]
    exact_mean: float | None = None
    breakpoints: tuple = ()

    def _native(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x.reshape(1, 1)
        elif x.ndim == 1:
            x = x[:, None] if self.dim == 1 else x[None, :]
        if x.shape[1] != self.dim:
            raise ValueError(f"{self.name} takes {self.dim} inputs, got {x.shape[1]}")
        return x

    def __call__(self, x) -> np.ndarray:
        """Evaluate on native-scale inputs, raising on domain violations."""
        x = self._native(x)
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        tol = 1e-12 * np.maximum(1.0, np.abs(hi - lo))
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            raise ValueError(f"input outside the domain of {self.name}")
        return np.asarray(self.func(x), dtype=float)

    def to_native(self, u) -> np.ndarray:
        u = self._native(u)
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        return lo + u * (hi - lo)

    def on_unit(self, u) -> np.ndarray:
        """Evaluate with inputs given in ``[0, 1]^p``."""
        return self(self.to_native(u))


def _beam(x):
    x = x[:, 0]
    return -x * (x**3 - 2.0 * x**2 + 1.0)


def _sin2x(x):
    return np.sin(2.0 * x[:, 0])


def _xiong(x):
    t = x[:, 0] - 0.9
    return np.sin(30.0 * t**4) * np.cos(2.0 * t) + t / 2.0


def _gramacy_lee(x):
    x = x[:, 0]
    return np.sin(10.0 * np.pi * x) / (2.0 * x) + (x - 1.0) ** 4


def _buhmann(x):
    x = x[:, 0]
    with np.errstate(divide="ignore"):
        return x**8 / (np.tan(1.0 + x**2) + 0.5)


BOREHOLE_BOUNDS = (
    ("r_w", 0.05, 0.15),
    ("r", 100.0, 50000.0),
    ("T_u", 63070.0, 115600.0),
    ("H_u", 990.0, 1110.0),
    ("T_l", 63.1, 116.0),
    ("H_l", 700.0, 820.0),
    ("L", 1120.0, 1680.0),
    ("K_w", 9855.0, 12045.0),
)


def _borehole(x):
    rw, r, Tu, Hu, Tl, Hl, L, Kw = x.T
    lr = np.log(r / rw)
    return 2.0 * np.pi * Tu * (Hu - Hl) / (lr * (1.0 + 2.0 * L * Tu / (lr * rw**2 * Kw) + Tu / Tl))


# tan(1 + x^2) has a pole where 1 + x^2 = pi/2
_BUHMANN_POLE = float(np.sqrt(np.pi / 2.0 - 1.0))

REGISTRY: dict[str, TestFunction] = {}


def register(fn: TestFunction) -> TestFunction:
    REGISTRY[fn.name] = fn
    return fn


beam = register(TestFunction("beam", 1, (0.0,), (1.0,), _beam, exact_mean=-0.2))
sin2x = register(
    TestFunction("sin2x", 1, (0.0,), (1.0,), _sin2x, exact_mean=(1.0 - np.cos(2.0)) / 2.0)
)
xiong = register(TestFunction("xiong", 1, (0.0,), (1.0,), _xiong))
gramacy_lee = register(TestFunction("gramacy_lee", 1, (0.5,), (2.5,), _gramacy_lee))
buhmann = register(
    TestFunction(
        "buhmann", 1, (-1.0,), (1.0,), _buhmann, breakpoints=(-_BUHMANN_POLE, _BUHMANN_POLE)
    )
)
borehole = register(
    TestFunction(
        "borehole",
        8,
        tuple(b[1] for b in BOREHOLE_BOUNDS),
        tuple(b[2] for b in BOREHOLE_BOUNDS),
        _borehole,
    )
)


def get(name: str) -> TestFunction:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown function {name!r}; available: {sorted(REGISTRY)}") from None


def true_mean(fn: TestFunction, n_mc: int = 1_000_000, seed: int = 0) -> tuple[float, float]:
    """Mean of ``fn`` under the uniform distribution on its box.

    One-dimensional functions use adaptive quadrature (split at any listed
    breakpoints); higher dimensions use seeded Monte Carlo. Returns
    ``(mean, standard_error)``, the error being the quadrature estimate
    for ``p == 1``.
    """
    if fn.dim == 1:
        a, b = fn.lower[0], fn.upper[0]
        edges = [a, *sorted(fn.breakpoints), b]
        total, err = 0.0, 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, e = integrate.quad(lambda t: float(fn.func(np.array([[t]]))[0]), lo, hi, limit=500, epsabs=1e-12, epsrel=1e-12)
            total += val
            err += e
        return total / (b - a), err / (b - a)
    rng = np.random.default_rng(seed)
    vals = fn.on_unit(rng.uniform(size=(n_mc, fn.dim)))
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_mc))
