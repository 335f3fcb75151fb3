"""OK vs RK on the one-dimensional test functions (xiong, gramacy_lee, buhmann), n = 30."""

import argparse
import sys

from ratkrig.experiments import ExperimentConfig, run_experiment

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=0)
    args = parser.parse_args()
    code = 0
    for fn in ("xiong", "gramacy_lee", "buhmann"):
        cfg = ExperimentConfig(
            "onedim-a1", fn=fn, reps=args.reps, seed=args.seed, threads=args.threads, out=f"results/onedim_{fn}.csv"
        )
        result = run_experiment(cfg)
        for g in result.summary["groups"]:
            print(f"{fn:<12} {g['method']:>3} {g['kernel']:<18} rmse={g['rmse']['median']:.4g} "
                  f"IS={g['interval_score']['median']:.4g} mu={g['mu_hat']['median']:.4g}")
        code = max(code, result.exit_code)
    sys.exit(code)
