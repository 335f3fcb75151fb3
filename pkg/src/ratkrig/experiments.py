"""Replicated simulation studies with deterministic CSV and JSON output.

Experiments
-----------
beam             OK vs RK on the beam deflection curve, n = 11, endpoints rescaled.
onedim-a1        OK vs RK on xiong / gramacy_lee / buhmann, n = 30.
universal-sin2x  UK vs rational UK with basis {1, x - 0.5} on sin(2x), n = 30.
borehole         OK vs RK on the borehole function, n = 80 uniform points, with LOOCV.
calibration      KOH vs RK-KOH on the linear calibration example over a theta grid.
custom           any registered function / methods / n.

Output
------
CSV columns (fixed order, RFC 4180 quoting)::

    replication,method,kernel,rmse,interval_score,loocv_rmse,mu_hat,coefficients,theta_hat,error

``coefficients`` and ``theta_hat`` hold ``;``-joined numbers. Empty cells
mean "not applicable"; a non-empty ``error`` cell marks a failed fit.
With ``timing`` enabled a trailing ``wall_time`` column is added (and the
output is then no longer reproducible byte for byte).

Config files are flat ``key = value`` text; keys are the field names of
:class:`ExperimentConfig`, list values are comma separated, ``#`` starts a
comment, and unknown keys are rejected.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from ratkrig import testfns
from ratkrig.calibration import eta_profile, plumlee_problem
from ratkrig.design import design_rescale_endpoints, design_uniform, replication_rng
from ratkrig.errors import ConfigError, RatKrigError
from ratkrig.kernels import DataSet, canonical_family
from ratkrig.krige import (
    OptimizerConfig,
    fit_ok,
    fit_rk,
    predict_idw,
    predict_limit,
)
from ratkrig.metrics import interval_score, loocv_rmse, rmse
from ratkrig.universal import RegressionBasis, fit_uk

logger = logging.getLogger(__name__)

EXPERIMENTS = ("beam", "onedim-a1", "universal-sin2x", "borehole", "calibration", "custom")

METHOD_LABELS = {
    "ok": "OK",
    "rk": "RK",
    "limit": "LIMIT",
    "idw": "IDW",
    "uk": "UK",
    "urk": "URK",
    "koh": "KOH",
    "rkkoh": "RK-KOH",
}

CSV_HEADER = (
    "replication",
    "method",
    "kernel",
    "rmse",
    "interval_score",
    "loocv_rmse",
    "mu_hat",
    "coefficients",
    "theta_hat",
    "error",
)

_DEFAULTS = {
    "beam": dict(fn="beam", n=11, kernels=("gaussian", "rational_quadratic"), methods=("ok", "rk")),
    "onedim-a1": dict(fn="xiong", n=30, kernels=("gaussian", "rational_quadratic"), methods=("ok", "rk")),
    "universal-sin2x": dict(fn="sin2x", n=30, kernels=("gaussian",), methods=("uk", "urk")),
    "borehole": dict(fn="borehole", n=80, kernels=("gaussian",), methods=("ok", "rk"), loocv=True),
    "calibration": dict(
        fn="plumlee", n=17, reps=20, kernels=("gaussian", "rational_quadratic"), methods=("koh", "rkkoh")
    ),
    "custom": dict(),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One replicated study. ``None`` fields take the experiment's default."""

    experiment: str = "custom"
    fn: str | None = None
    kernels: tuple | None = None
    methods: tuple | None = None
    n: int | None = None
    reps: int | None = None
    seed: int = 0
    grid: int = 1001
    alpha: float = 0.05
    out: str | None = None
    threads: int = 0
    loocv: bool | None = None
    timing: bool = False
    theta_grid: tuple = tuple(round(0.1 * k, 10) for k in range(1, 11))
    noise_sd: float = 0.02
    n_starts: int = 5
    max_evals: int = 500

    def resolved(self) -> "ExperimentConfig":
        """Fill defaults for the chosen experiment and validate."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        d = _DEFAULTS[self.experiment]
        cfg = replace(
            self,
            fn=self.fn or d.get("fn"),
            kernels=tuple(self.kernels or d.get("kernels", ("gaussian",))),
            methods=tuple(self.methods or d.get("methods", ("ok", "rk"))),
            n=self.n if self.n is not None else d.get("n"),
            reps=self.reps if self.reps is not None else d.get("reps", 50),
            loocv=self.loocv if self.loocv is not None else d.get("loocv", False),
        )
        try:
            kernels = tuple(canonical_family(k) for k in cfg.kernels)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        cfg = replace(cfg, kernels=kernels, methods=tuple(m.lower() for m in cfg.methods))
        bad = [m for m in cfg.methods if m not in METHOD_LABELS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {sorted(METHOD_LABELS)}")
        if cfg.fn is None:
            raise ConfigError("a function name is required (--fn)")
        if cfg.experiment == "calibration" or cfg.fn == "plumlee":
            if any(m not in ("koh", "rkkoh") for m in cfg.methods):
                raise ConfigError("calibration supports methods koh and rkkoh only")
        else:
            if cfg.fn not in testfns.REGISTRY:
                raise ConfigError(f"unknown function {cfg.fn!r}; available: {sorted(testfns.REGISTRY)}")
            if any(m in ("koh", "rkkoh") for m in cfg.methods):
                raise ConfigError("koh / rkkoh need the calibration experiment")
        if cfg.n is None or cfg.n < 3:
            raise ConfigError("n must be >= 3")
        if cfg.reps < 1:
            raise ConfigError("reps must be >= 1")
        if cfg.grid < 1:
            raise ConfigError("grid must be >= 1")
        if not 0.0 < cfg.alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)")
        return cfg

    @property
    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(n_starts=self.n_starts, max_evals=self.max_evals, seed=self.seed)


_FIELD_TYPES = {
    "experiment": str,
    "fn": str,
    "kernels": tuple,
    "methods": tuple,
    "n": int,
    "reps": int,
    "seed": int,
    "grid": int,
    "alpha": float,
    "out": str,
    "threads": int,
    "loocv": bool,
    "timing": bool,
    "theta_grid": "floats",
    "noise_sd": float,
    "n_starts": int,
    "max_evals": int,
}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if kind is tuple:
            return tuple(v.strip() for v in raw.split(",") if v.strip())
        if kind == "floats":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        return kind(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config(path, **overrides) -> ExperimentConfig:
    values = parse_config_text(Path(path).read_text())
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


# ---------------------------------------------------------------------------
# rows
# ---------------------------------------------------------------------------


@dataclass
class ResultRow:
    replication: int
    method: str
    kernel: str
    rmse: float | None = None
    interval_score: float | None = None
    loocv_rmse: float | None = None
    mu_hat: float | None = None
    coefficients: tuple = ()
    theta_hat: tuple = ()
    error: str = ""
    wall_time: float | None = field(default=None, compare=False)


def _fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    return "" if np.isnan(v) else repr(v)


def _fmt_vec(v) -> str:
    return ";".join(repr(float(a)) for a in v)


def rows_to_csv(rows, timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_HEADER + (("wall_time",) if timing else ()))
    for r in rows:
        rec = [
            r.replication,
            r.method,
            r.kernel,
            _fmt(r.rmse),
            _fmt(r.interval_score),
            _fmt(r.loocv_rmse),
            _fmt(r.mu_hat),
            _fmt_vec(r.coefficients),
            _fmt_vec(r.theta_hat),
            r.error,
        ]
        if timing:
            rec.append(_fmt(r.wall_time))
        w.writerow(rec)
    return buf.getvalue()


def read_csv_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# one replication
# ---------------------------------------------------------------------------


def _design_and_test(cfg: ExperimentConfig, fn: testfns.TestFunction, rng):
    if fn.dim == 1:
        X = design_rescale_endpoints(design_uniform(cfg.n, 1, rng).ravel())[:, None]
        T = np.linspace(0.0, 1.0, cfg.grid)[:, None]
    else:
        X = design_uniform(cfg.n, fn.dim, rng)
        T = design_uniform(cfg.grid, fn.dim, rng)
    return DataSet(X, fn.on_unit(X)), T, fn.on_unit(T)


def _uq_metrics(pred, truth, alpha):
    lo, hi = pred.interval(alpha)
    return rmse(pred.mean, truth), interval_score(lo, hi, truth, alpha)


def _run_method(cfg, method, family, data, T, truth) -> ResultRow:
    row = ResultRow(0, METHOD_LABELS[method], family)
    opt = cfg.optimizer
    if method in ("ok", "rk"):
        fit = fit_ok if method == "ok" else fit_rk
        model = fit(data, family, opt)
        row.rmse, row.interval_score = _uq_metrics(model.predict(T), truth, cfg.alpha)
        row.mu_hat = model.mu_ok if method == "ok" else model.mu
        row.theta_hat = tuple(model.spec.lengthscales)
        if cfg.loocv:
            def refit(d, lengthscales=None):
                return fit(d, family, opt, lengthscales=lengthscales)

            row.loocv_rmse = loocv_rmse(refit, data, lengthscales=model.spec.lengthscales)
    elif method == "limit":
        spec = fit_ok(data, family, opt).spec
        row.rmse = rmse(predict_limit(data, spec, T), truth)
        row.theta_hat = tuple(spec.lengthscales)
    elif method == "idw":
        row.rmse = rmse(predict_idw(data, np.ones(data.p), T), truth)
    elif method in ("uk", "urk"):
        variant = "plain" if method == "uk" else "rational"
        model = fit_uk(data, RegressionBasis.linear(data.p), family, variant, opt)
        row.rmse, row.interval_score = _uq_metrics(model.predict(T), truth, cfg.alpha)
        row.mu_hat = float(model.beta_hat[0])
        row.coefficients = tuple(model.beta_hat)
        row.theta_hat = tuple(model.spec.lengthscales)
    return row


def _calibration_rows(cfg: ExperimentConfig, rep: int, rng) -> list[ResultRow]:
    noise = rng.normal(size=cfg.n)
    rows = []
    for family in cfg.kernels:
        problem = plumlee_problem(_FixedNormal(noise), family, cfg.noise_sd, cfg.n)
        for method in cfg.methods:
            label = METHOD_LABELS[method]
            t0 = time.perf_counter()
            prof = eta_profile(problem, cfg.theta_grid, label)
            dt = (time.perf_counter() - t0) / len(cfg.theta_grid)
            for k, theta in enumerate(prof.theta_grid):
                eta = prof.eta_hat[:, k]
                ok = np.all(np.isfinite(eta))
                rows.append(
                    ResultRow(
                        rep,
                        label,
                        family,
                        mu_hat=float(eta[0]) if ok else None,
                        coefficients=tuple(eta) if ok else (),
                        theta_hat=(float(theta),),
                        error="" if ok else "error: fit failed",
                        wall_time=dt,
                    )
                )
    return rows


class _FixedNormal:
    """Stand-in generator replaying pre-drawn standard normals (shared across kernels)."""

    def __init__(self, z):
        self.z = np.asarray(z, dtype=float)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return loc + scale * self.z[:size]


def run_replication(cfg: ExperimentConfig, rep: int) -> list[ResultRow]:
    rng = replication_rng(cfg.seed, rep)
    if cfg.experiment == "calibration" or cfg.fn == "plumlee":
        return _calibration_rows(cfg, rep, rng)
    fn = testfns.get(cfg.fn)
    data, T, truth = _design_and_test(cfg, fn, rng)
    rows = []
    for family in cfg.kernels:
        for method in cfg.methods:
            t0 = time.perf_counter()
            try:
                row = _run_method(cfg, method, family, data, T, truth)
            except (RatKrigError, np.linalg.LinAlgError) as exc:
                row = ResultRow(0, METHOD_LABELS[method], family, error=f"error: {type(exc).__name__}: {exc}")
            row.replication = rep
            row.wall_time = time.perf_counter() - t0
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    summary: dict

    @property
    def n_errors(self) -> int:
        return sum(1 for r in self.rows if r.error)

    @property
    def exit_code(self) -> int:
        return 0 if self.n_errors == 0 else 1

    def csv_text(self) -> str:
        return rows_to_csv(self.rows, self.config.timing)


def _stats(values) -> dict | None:
    v = np.asarray([a for a in values if a is not None and np.isfinite(a)], dtype=float)
    if v.size == 0:
        return None
    q25, med, q75 = np.percentile(v, [25, 50, 75])
    return {"median": float(med), "q25": float(q25), "q75": float(q75), "mean": float(v.mean()), "count": int(v.size)}


def reference_value(cfg: ExperimentConfig) -> float | None:
    if cfg.fn == "plumlee":
        return 4.0
    fn = testfns.get(cfg.fn)
    if fn.exact_mean is not None:
        return float(fn.exact_mean)
    return testfns.true_mean(fn, n_mc=200_000, seed=0)[0]


def summarize(cfg: ExperimentConfig, rows) -> dict:
    groups: dict = {}
    for r in rows:
        key = (r.method, r.kernel) if not (cfg.experiment == "calibration" or cfg.fn == "plumlee") else (
            r.method,
            r.kernel,
            r.theta_hat[0],
        )
        groups.setdefault(key, []).append(r)
    ref = reference_value(cfg)
    out = []
    for key in sorted(groups, key=lambda k: tuple(str(a) for a in k)):
        g = groups[key]
        entry = {"method": key[0], "kernel": key[1]}
        if len(key) == 3:
            entry["theta"] = key[2]
        entry["rows"] = len(g)
        entry["errors"] = sum(1 for r in g if r.error)
        for name in ("rmse", "interval_score", "loocv_rmse", "mu_hat"):
            s = _stats([getattr(r, name) for r in g])
            if s is not None:
                entry[name] = s
        ncoef = max((len(r.coefficients) for r in g), default=0)
        if ncoef > 1:
            entry["coefficients"] = [_stats([r.coefficients[j] for r in g if len(r.coefficients) > j]) for j in range(ncoef)]
        if ref is not None:
            s = _stats([abs(r.mu_hat - ref) for r in g if r.mu_hat is not None])
            if s is not None:
                entry["abs_error_mu"] = s
        out.append(entry)
    cfgd = asdict(cfg)
    cfgd.pop("out")
    cfgd.pop("threads")
    return {"config": cfgd, "reference_mean": ref, "groups": out}


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Run every replication of ``config``; write CSV and summary when ``out`` is set.

    Replications are distributed over ``threads`` worker processes
    (0 = all CPUs); rows are merged in replication order, so the output
    does not depend on the number of workers.
    """
    cfg = config.resolved()
    workers = cfg.threads or os.cpu_count() or 1
    workers = min(workers, cfg.reps)
    reps = range(cfg.reps)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_replication, [cfg] * cfg.reps, reps))
    else:
        chunks = [run_replication(cfg, r) for r in reps]
    rows = [row for chunk in chunks for row in chunk]
    result = ExperimentResult(cfg, rows, summarize(cfg, rows))
    if write and cfg.out:
        write_outputs(result, cfg.out)
    return result


def summary_path(out) -> Path:
    p = Path(out)
    return p.with_name(p.stem + ".summary.json")


def write_outputs(result: ExperimentResult, out) -> tuple[Path, Path]:
    csv_path = Path(out)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        fh.write(result.csv_text())
    js = summary_path(out)
    js.write_text(json.dumps(result.summary, indent=1, sort_keys=True) + "\n")
    return csv_path, js


def config_fields() -> list[str]:
    return [f.name for f in fields(ExperimentConfig)]
