import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from ratkrig.kernels import DataSet, KernelSpec
from ratkrig.krige import build_rk, fit_ok, fit_rk
from ratkrig.metrics import interval_score, loocv_predictions, loocv_rmse, report, rmse


def test_rmse_examples():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(np.sqrt(12.5), rel=1e-15)
    rng = np.random.default_rng(0)
    p, t = rng.normal(size=(2, 100))
    assert rmse(p, t) == pytest.approx(np.sqrt(sum((a - b) ** 2 for a, b in zip(p, t)) / 100), rel=1e-13)


def test_rmse_length_mismatch():
    with pytest.raises(ValueError):
        rmse([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        rmse([], [])


def test_interval_score_examples():
    assert interval_score([0.0, 1.0], [2.0, 2.5], [1.0, 2.0]) == pytest.approx(1.75)
    assert interval_score([0.0], [1.0], [-0.1], 0.05) == pytest.approx(5.0, rel=1e-14)


def test_interval_score_random_oracle():
    rng = np.random.default_rng(2)
    lo = rng.normal(size=50)
    hi = lo + rng.uniform(0, 2, size=50)
    t = rng.normal(size=50)
    a = 0.1
    expect = np.mean([(u - l) + 2 / a * max(l - x, 0) + 2 / a * max(x - u, 0) for l, u, x in zip(lo, hi, t)])
    assert interval_score(lo, hi, t, a) == pytest.approx(expect, rel=1e-13)


def test_interval_score_errors():
    with pytest.raises(ValueError):
        interval_score([1.0], [0.0], [0.5])
    for alpha in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            interval_score([0.0], [1.0], [0.5], alpha)


@given(st.floats(-10, 10), st.floats(0.0, 5.0), st.floats(0.01, 5.0), st.floats(0.01, 0.5))
def test_interval_score_widening_to_cover_is_not_worse(lo, width, gap, alpha):
    # truth below the interval; extending the lower end down to it cannot raise the score
    t = lo - gap
    before = interval_score([lo], [lo + width], [t], alpha)
    after = interval_score([t], [lo + width], [t], alpha)
    assert after <= before + 1e-12


@given(st.integers(0, 2**32 - 1))
def test_rmse_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    p, t = rng.normal(size=(2, 20))
    perm = rng.permutation(20)
    assert rmse(p[perm], t[perm]) == pytest.approx(rmse(p, t), rel=1e-14)


def test_report_gaussian_intervals():
    r = report([0.0, 1.0], [1.0, 1.0], [0.0, 1.0], 0.05)
    assert r.rmse == 0.0
    assert r.interval_score == pytest.approx(2 * norm.ppf(0.975), rel=1e-14)
    assert r.n_test == 2


def test_loocv_constant_y_is_zero():
    X = np.linspace(0, 1, 6)[:, None]
    data = DataSet(X, np.full(6, 2.0))
    assert loocv_rmse(fit_rk, data) == pytest.approx(0.0, abs=1e-12)


def test_loocv_matches_explicit_loop():
    rng = np.random.default_rng(4)
    X = rng.uniform(size=(4, 1))
    data = DataSet(X, np.sin(5 * X[:, 0]))
    spec = KernelSpec("gaussian", [0.3])

    def fit(d, lengthscales=None):
        return build_rk(d, spec.with_lengthscales(lengthscales if lengthscales is not None else [0.3]))

    errs = []
    for i in range(4):
        keep = [j for j in range(4) if j != i]
        m = build_rk(DataSet(X[keep], data.y[keep]), spec)
        errs.append(m.predict(X[i : i + 1]).mean[0] - data.y[i])
    assert loocv_rmse(fit, data) == pytest.approx(np.sqrt(np.mean(np.square(errs))), abs=1e-12)
    assert loocv_rmse(fit, data, lengthscales=[0.3]) == pytest.approx(np.sqrt(np.mean(np.square(errs))), abs=1e-12)


def test_loocv_refit_option_runs():
    X = np.linspace(0, 1, 7)[:, None]
    data = DataSet(X, np.cos(3 * X[:, 0]))
    fixed = loocv_predictions(fit_ok, data)
    refit = loocv_predictions(fit_ok, data, refit_hyperparameters=True)
    assert np.all(np.isfinite(fixed)) and np.all(np.isfinite(refit))


def test_loocv_needs_three_points():
    with pytest.raises(ValueError):
        loocv_rmse(fit_rk, DataSet(np.array([[0.0], [1.0]]), np.array([0.0, 1.0])))
