"""Shared command-line handling for the study scripts."""

from __future__ import annotations

import argparse
import json
import sys

from ratkrig.experiments import ExperimentConfig, run_experiment


def run(experiment: str, description: str, **defaults) -> int:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--reps", type=int, default=defaults.pop("reps", None))
    parser.add_argument("--seed", type=int, default=defaults.pop("seed", 0))
    parser.add_argument("--threads", type=int, default=0)
    parser.add_argument("--out", default=f"results/{experiment}.csv")
    args = parser.parse_args()
    cfg = ExperimentConfig(
        experiment=experiment, reps=args.reps, seed=args.seed, threads=args.threads, out=args.out, **defaults
    )
    result = run_experiment(cfg)
    for g in result.summary["groups"]:
        keys = {k: g[k]["median"] for k in ("rmse", "interval_score", "loocv_rmse", "mu_hat") if k in g}
        label = f"{g['method']:>7} {g['kernel']:<18}" + (f" theta={g['theta']:<4}" if "theta" in g else "")
        print(label, json.dumps(keys))
    print(f"rows written to {args.out}", file=sys.stderr)
    return result.exit_code
