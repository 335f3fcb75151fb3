"""Command-line interface.

Subcommands
-----------
list-fns     registered test functions with their dimension and domain
fit          fit ok / rk / uk / urk and save a versioned JSON model
predict      predictive mean and sd from a saved model
loocv        leave-one-out RMSE of one method
experiment   run a replicated study; write CSV and summary JSON

Training data come either from ``--data file.csv`` (header ``x1,...,xp,y``)
or from ``--fn NAME --n N --seed S`` (uniform design on the unit cube,
endpoints rescaled to 0 and 1 in one dimension).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from ratkrig import testfns
from ratkrig.design import design_rescale_endpoints, design_uniform
from ratkrig.errors import ConfigError, RatKrigError
from ratkrig.experiments import ExperimentConfig, load_config, run_experiment, summary_path, write_outputs
from ratkrig.kernels import DataSet
from ratkrig.krige import fit_ok, fit_rk, predict_idw, predict_limit
from ratkrig.metrics import loocv_rmse, rmse
from ratkrig.persist import load_model, save_model
from ratkrig.universal import RegressionBasis, fit_uk

KERNELS = ("gaussian", "rq", "matern32", "exp")
METHODS = ("ok", "rk", "limit", "idw", "uk", "urk", "koh", "rkkoh")


def read_data(path) -> DataSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ConfigError(f"{path}: expected a header row and data rows")
    try:
        arr = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return DataSet(arr[:, :-1], arr[:, -1])


def read_points(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    try:
        float(rows[0][0])
    except ValueError:
        rows = rows[1:]
    return np.array([[float(v) for v in r] for r in rows], dtype=float)


def _generated_data(args) -> DataSet:
    if args.fn is None:
        raise ConfigError("give --data or --fn")
    fn = testfns.get(args.fn)
    rng = np.random.default_rng(args.seed)
    if fn.dim == 1:
        X = design_rescale_endpoints(design_uniform(args.n, 1, rng).ravel())[:, None]
    else:
        X = design_uniform(args.n, fn.dim, rng)
    return DataSet(X, fn.on_unit(X))


def _data(args) -> DataSet:
    return read_data(args.data) if args.data else _generated_data(args)


def _fit(method, data, kernel, lengthscales=None):
    if method == "ok":
        return fit_ok(data, kernel, lengthscales=lengthscales)
    if method == "rk":
        return fit_rk(data, kernel, lengthscales=lengthscales)
    if method in ("uk", "urk"):
        variant = "plain" if method == "uk" else "rational"
        return fit_uk(data, RegressionBasis.linear(data.p), kernel, variant, lengthscales=lengthscales)
    raise ConfigError(f"method {method!r} has no fitted model; use ok, rk, uk or urk")


def _model_summary(model) -> dict:
    out = {
        "family": model.spec.family,
        "lengthscales": model.spec.lengthscales.tolist(),
        "objective": model.objective,
    }
    for name in ("mu", "nu2", "gamma_hat", "delta", "mu_ok", "tau2"):
        if hasattr(model, name):
            out[name] = getattr(model, name)
    if hasattr(model, "beta_hat"):
        out["beta_hat"] = model.beta_hat.tolist()
        out["variant"] = model.variant
    return out


def cmd_list_fns(args) -> int:
    for name in sorted(testfns.REGISTRY):
        fn = testfns.REGISTRY[name]
        lo = ",".join(repr(float(v)) for v in np.atleast_1d(fn.lower))
        hi = ",".join(repr(float(v)) for v in np.atleast_1d(fn.upper))
        print(f"{name}\tdim={fn.dim}\tlower={lo}\tupper={hi}")
    return 0


def cmd_fit(args) -> int:
    model = _fit(args.method, _data(args), args.kernel)
    if args.out:
        save_model(model, args.out)
    print(json.dumps(_model_summary(model), indent=1))
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    if args.points:
        pts = read_points(args.points)
    else:
        if model.data.p != 1:
            raise ConfigError("--grid only applies to one-dimensional models; use --points")
        pts = np.linspace(0.0, 1.0, args.grid)[:, None]
    pred = model.predict(pts)
    lo, hi = pred.interval(args.alpha)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(pts.shape[1])] + ["mean", "sd", "lower", "upper"])
        for row, m, s, a, b in zip(pts, pred.mean, pred.sd, lo, hi):
            w.writerow([repr(float(v)) for v in (*row, m, s, a, b)])
    finally:
        if args.out:
            out.close()
    return 0


def cmd_loocv(args) -> int:
    data = _data(args)
    if args.method in ("limit", "idw"):
        spec = fit_ok(data, args.kernel).spec
        preds = []
        for i in range(data.n):
            d = data.drop(i)
            x = data.X[i : i + 1]
            preds.append(predict_limit(d, spec, x)[0] if args.method == "limit" else predict_idw(d, np.ones(data.p), x)[0])
        value = rmse(preds, data.y)
    else:
        def fit_fn(d, lengthscales=None):
            return _fit(args.method, d, args.kernel, lengthscales)

        value = loocv_rmse(fit_fn, data, refit_hyperparameters=args.refit)
    print(json.dumps({"method": args.method, "kernel": args.kernel, "n": data.n, "loocv_rmse": value}))
    return 0


def cmd_experiment(args) -> int:
    overrides = dict(
        experiment=args.experiment,
        fn=args.fn,
        kernels=tuple(args.kernel) if args.kernel else None,
        methods=tuple(args.method) if args.method else None,
        n=args.n,
        reps=args.reps,
        seed=args.seed,
        grid=args.grid,
        alpha=args.alpha,
        out=args.out,
        threads=args.threads,
        loocv=True if args.loocv else None,
        timing=True if args.timing else None,
    )
    if args.config:
        cfg = load_config(args.config, **overrides)
    else:
        cfg = ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
    result = run_experiment(cfg, write=False)
    if result.config.out:
        write_outputs(result, result.config.out)
        print(f"wrote {result.config.out} and {summary_path(result.config.out)}", file=sys.stderr)
    else:
        sys.stdout.write(result.csv_text())
    if result.n_errors:
        print(f"{result.n_errors} of {len(result.rows)} rows failed", file=sys.stderr)
    return result.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ratkrig", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list-fns", help="list registered test functions").set_defaults(func=cmd_list_fns)

    def data_args(p):
        p.add_argument("--data", help="CSV with header x1,...,xp,y")
        p.add_argument("--fn", help="generate data from a registered test function")
        p.add_argument("--n", type=int, default=11)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--kernel", choices=KERNELS, default="gaussian")

    p = sub.add_parser("fit", help="fit a model and save it")
    data_args(p)
    p.add_argument("--method", choices=("ok", "rk", "uk", "urk"), default="rk")
    p.add_argument("--out", help="model JSON path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict from a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--points", help="CSV of query points (optional header)")
    p.add_argument("--grid", type=int, default=1001, help="equispaced grid on [0,1] for 1-D models")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("loocv", help="leave-one-out RMSE")
    data_args(p)
    p.add_argument("--method", choices=("ok", "rk", "limit", "idw", "uk", "urk"), default="rk")
    p.add_argument("--refit", action="store_true", help="refit length-scales in every fold")
    p.set_defaults(func=cmd_loocv)

    p = sub.add_parser("experiment", help="run a replicated study")
    p.add_argument("--experiment", help="beam, onedim-a1, universal-sin2x, borehole, calibration or custom")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--fn")
    p.add_argument("--kernel", action="append", choices=KERNELS, help="repeatable")
    p.add_argument("--method", action="append", choices=METHODS, help="repeatable")
    p.add_argument("--n", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--out", help="CSV path; the summary goes next to it as <stem>.summary.json")
    p.add_argument("--threads", type=int, help="worker processes (default: all CPUs)")
    p.add_argument("--loocv", action="store_true")
    p.add_argument("--timing", action="store_true", help="add a wall_time column")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (RatKrigError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
