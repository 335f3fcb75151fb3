import csv
import io
import json

import numpy as np
import pytest

from ratkrig.errors import ConfigError
from ratkrig.experiments import (
    CSV_HEADER,
    ExperimentConfig,
    load_config,
    parse_config_text,
    run_experiment,
    summary_path,
)


def small(**kw):
    base = dict(experiment="custom", fn="xiong", n=6, reps=2, grid=51, threads=1, n_starts=2, max_evals=60)
    base.update(kw)
    return ExperimentConfig(**base)


def test_parse_config_text():
    text = """
    # beam study
    experiment = beam
    kernels = gaussian, rq
    reps = 3   # fewer than usual
    alpha = 0.1
    loocv = yes
    theta_grid = 0.2, 0.4
    """
    v = parse_config_text(text)
    assert v == dict(
        experiment="beam", kernels=("gaussian", "rq"), reps=3, alpha=0.1, loocv=True, theta_grid=(0.2, 0.4)
    )


@pytest.mark.parametrize("text", ["colour = red", "reps = many", "reps", "loocv = maybe"])
def test_parse_config_rejects(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_load_config_with_overrides(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("experiment = beam\nreps = 4\n")
    cfg = load_config(p, reps=2, seed=None)
    assert (cfg.experiment, cfg.reps, cfg.seed) == ("beam", 2, 0)


def test_defaults_resolved():
    cfg = ExperimentConfig("borehole").resolved()
    assert (cfg.fn, cfg.n, cfg.reps, cfg.loocv, cfg.grid, cfg.alpha) == ("borehole", 80, 50, True, 1001, 0.05)
    assert ExperimentConfig("calibration").resolved().reps == 20
    assert ExperimentConfig("beam").resolved().kernels == ("gaussian", "rational_quadratic")


@pytest.mark.parametrize(
    "kw",
    [
        dict(experiment="nope"),
        dict(fn="nope"),
        dict(n=2),
        dict(reps=0),
        dict(alpha=1.5),
        dict(kernels=("linear",)),
        dict(methods=("svm",)),
        dict(methods=("koh",)),
        dict(experiment="custom", fn=None),
    ],
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        small(**kw).resolved()


def test_smoke_run_rows_finite():
    res = run_experiment(small(n=5, reps=1, methods=("ok", "rk", "limit", "idw", "uk", "urk")))
    assert res.exit_code == 0
    assert len(res.rows) == 6
    for r in res.rows:
        assert np.isfinite(r.rmse) and not r.error
        assert r.interval_score is None or np.isfinite(r.interval_score)


def test_csv_format():
    res = run_experiment(small(methods=("rk", "urk")))
    rows = list(csv.reader(io.StringIO(res.csv_text())))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + 2 * 2
    body = dict(zip(rows[0], rows[2]))
    assert body["method"] == "URK" and body["replication"] == "0"
    assert len(body["coefficients"].split(";")) == 2
    assert float(body["rmse"]) >= 0
    assert res.csv_text().endswith("\r\n")


def test_timing_column_optional():
    cfg = small(reps=1, methods=("idw",), timing=True)
    header = run_experiment(cfg).csv_text().splitlines()[0]
    assert header.endswith(",wall_time")


def test_identical_output_serial_twice_and_parallel():
    cfg = small(methods=("ok", "rk"), reps=3)
    a = run_experiment(cfg).csv_text()
    b = run_experiment(cfg).csv_text()
    c = run_experiment(small(methods=("ok", "rk"), reps=3, threads=2)).csv_text()
    assert a == b == c


def test_different_seed_changes_output():
    assert run_experiment(small(seed=1)).csv_text() != run_experiment(small(seed=2)).csv_text()


def test_failures_marked_and_exit_nonzero():
    res = run_experiment(small(n=3, reps=1, methods=("rk", "uk")))
    errors = [r for r in res.rows if r.error]
    assert len(errors) == 1 and errors[0].method == "UK"
    assert errors[0].error.startswith("error: InsufficientData")
    assert res.exit_code == 1
    assert len(res.rows) == 2


def test_summary_and_files(tmp_path):
    out = tmp_path / "res" / "beam.csv"
    res = run_experiment(ExperimentConfig("beam", reps=2, threads=1, out=str(out), n_starts=2, max_evals=60))
    assert out.read_bytes() == res.csv_text().encode()
    summary = json.loads(summary_path(out).read_text())
    assert summary["reference_mean"] == -0.2
    groups = {(g["method"], g["kernel"]): g for g in summary["groups"]}
    assert set(groups) == {("OK", "gaussian"), ("RK", "gaussian"), ("OK", "rational_quadratic"), ("RK", "rational_quadratic")}
    g = groups[("RK", "gaussian")]
    assert g["rows"] == 2 and g["errors"] == 0
    assert g["rmse"]["q25"] <= g["rmse"]["median"] <= g["rmse"]["q75"]
    assert "abs_error_mu" in g


def test_calibration_rows():
    res = run_experiment(ExperimentConfig("calibration", reps=1, threads=1, theta_grid=(0.2, 0.6)))
    assert len(res.rows) == 2 * 2 * 2
    assert {r.method for r in res.rows} == {"KOH", "RK-KOH"}
    assert all(r.theta_hat[0] in (0.2, 0.6) for r in res.rows)
    assert all(np.isfinite(r.mu_hat) for r in res.rows)
    assert {g.get("theta") for g in res.summary["groups"]} == {0.2, 0.6}


def test_loocv_column():
    res = run_experiment(small(reps=1, methods=("ok",), loocv=True))
    assert res.rows[0].loocv_rmse is not None and res.rows[0].loocv_rmse >= 0
