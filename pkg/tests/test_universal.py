import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from ratkrig.errors import InsufficientData, RankDeficient, RankDeficientBasis
from ratkrig.kernels import DataSet, KernelSpec
from ratkrig.krige import build_rk
from ratkrig.universal import RegressionBasis, build_uk, check_full_rank, fit_uk


def instance(seed, n=8, p=1):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, p))
    return DataSet(X, np.sin(3 * X[:, 0]) + rng.normal(scale=0.1, size=n))


def test_linear_basis_columns():
    B = RegressionBasis.linear(2)
    np.testing.assert_allclose(B(np.array([[0.5, 1.0], [0.0, 0.25]])), [[1, 0, 0.5], [1, -0.5, -0.25]])
    assert B.size == 3 and B.kind == "linear"


def test_constant_basis_reduces_to_rk():
    data = instance(0)
    spec = KernelSpec("gaussian", [0.3])
    uk = build_uk(data, RegressionBasis.constant(), spec, "rational")
    rk = build_rk(data, spec)
    assert uk.beta_hat[0] == pytest.approx(rk.mu, abs=1e-10)
    q = np.linspace(-0.2, 1.2, 57)
    np.testing.assert_allclose(uk.predict(q).mean, rk.predict(q).mean, atol=1e-10)


@given(st.integers(0, 2**32 - 1))
def test_constant_basis_mean_identity_random(seed):
    data = instance(seed, n=int(np.random.default_rng(seed).integers(4, 12)))
    spec = KernelSpec("rq", [0.25])
    q = np.random.default_rng(seed).uniform(size=20)
    a = build_uk(data, RegressionBasis.constant(), spec).predict(q).mean
    b = build_rk(data, spec).predict(q).mean
    np.testing.assert_allclose(a, b, atol=1e-10 * max(1.0, np.abs(data.y).max()))


@pytest.mark.parametrize("variant", ["rational", "plain"])
def test_exact_linear_data(variant):
    X = np.linspace(0, 1, 9)[:, None]
    data = DataSet(X, 2.0 + 3.0 * (X[:, 0] - 0.5))
    m = build_uk(data, RegressionBasis.linear(1), KernelSpec("gaussian", [0.3]), variant)
    np.testing.assert_allclose(m.beta_hat, [2.0, 3.0], atol=1e-8)
    assert m.nu2 < 1e-15


@pytest.mark.parametrize("variant", ["rational", "plain"])
def test_interpolates(variant):
    data = instance(3, n=10)
    m = fit_uk(data, RegressionBasis.linear(1), "gaussian", variant)
    pred = m.predict(data.X)
    assert np.max(np.abs(pred.mean - data.y)) / m.y_scale <= 1e-3
    assert np.all(pred.sd / m.y_scale <= 1e-3)


@pytest.mark.parametrize("variant", ["rational", "plain"])
def test_beta_matches_oracle(variant):
    data = instance(5, n=4)
    spec = KernelSpec("gaussian", [0.25])
    B = RegressionBasis.linear(1)
    m = build_uk(data, B, spec, variant)
    beta, nu2 = oracles.uk_beta("gaussian", data.X, data.y, [0.25], B(data.X), variant == "rational")
    np.testing.assert_allclose(m.beta_hat, beta, atol=1e-10)
    assert m.nu2 == pytest.approx(nu2, abs=1e-10)


def test_rational_prediction_matches_oracle():
    data = instance(6, n=5)
    th = [0.15]
    B = RegressionBasis.linear(1)
    m = build_uk(data, B, KernelSpec("gaussian", th), "rational")
    X, y, F = data.X, data.y, B(data.X)
    R = oracles.corr_matrix("gaussian", X, th)
    Ri = np.linalg.inv(R)
    c = oracles.c_hat(R)[0]
    d = R @ c
    Si = np.diag(d) @ Ri @ np.diag(d)
    Minv = np.linalg.inv(F.T @ Si @ F)
    beta = Minv @ F.T @ Si @ y
    e = y - F @ beta
    nu2 = e @ Si @ e / (len(y) - 2)
    for x in (0.05, 0.5, 0.93):
        r, prior = oracles.cross("gaussian", X, [x], th)
        f = np.array([1.0, x - 0.5])
        den = r @ c
        mean = f @ beta + r @ Ri @ (d * e) / den
        h = f - F.T @ np.diag(d) @ Ri @ r / den
        var = nu2 * ((prior - r @ Ri @ r) / den**2 + h @ Minv @ h)
        pred = m.predict(np.array([x]))
        assert pred.mean[0] == pytest.approx(mean, rel=1e-10, abs=1e-10)
        assert pred.sd[0] ** 2 == pytest.approx(var, rel=1e-10, abs=1e-10)


def test_as_printed_is_regression_part():
    data = instance(7, n=10)
    m = build_uk(data, RegressionBasis.linear(1), KernelSpec("gaussian", [0.2]))
    q = np.linspace(0, 1, 5)
    np.testing.assert_allclose(m.predict(q, as_printed=True).mean, m.beta_hat[0] + m.beta_hat[1] * (q - 0.5))


def test_rank_deficient_basis():
    basis = RegressionBasis.from_callables([lambda X: np.ones(len(X)), lambda X: 2 * np.ones(len(X))])
    with pytest.raises(RankDeficientBasis):
        fit_uk(instance(1), basis)
    assert RankDeficientBasis is RankDeficient
    with pytest.raises(RankDeficient):
        check_full_rank(np.zeros((4, 1)))


def test_insufficient_data():
    X = np.array([[0.1], [0.5], [0.9]])
    with pytest.raises(InsufficientData):
        fit_uk(DataSet(X, X[:, 0]), RegressionBasis.linear(1))


def test_unknown_variant():
    with pytest.raises(ValueError):
        fit_uk(instance(1), RegressionBasis.constant(), variant="other")


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 50.0))
def test_scale_equivariance(seed, k):
    data = instance(seed, n=7)
    spec = KernelSpec("gaussian", [0.3])
    B = RegressionBasis.linear(1)
    a = build_uk(data, B, spec)
    b = build_uk(DataSet(data.X, k * data.y), B, spec)
    np.testing.assert_allclose(b.beta_hat, k * a.beta_hat, rtol=1e-8, atol=1e-10 * k)
    q = np.linspace(0, 1, 9)
    np.testing.assert_allclose(b.predict(q).sd, k * a.predict(q).sd, rtol=1e-7, atol=1e-10 * k)
