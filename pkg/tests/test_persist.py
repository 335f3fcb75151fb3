import json
import os

import numpy as np
import pytest

from ratkrig.errors import ModelFileError, VersionError
from ratkrig.kernels import DataSet
from ratkrig.krige import fit_ok, fit_rk
from ratkrig.persist import load_model, model_to_dict, save_model
from ratkrig.universal import RegressionBasis, fit_uk

FIXTURE = os.path.join(os.path.dirname(__file__), "data", "model_missing_field.json")


def data2d():
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(15, 2))
    return DataSet(X, np.sin(4 * X[:, 0]) + X[:, 1] ** 2)


@pytest.mark.parametrize(
    "fit",
    [
        lambda d: fit_rk(d, "gaussian"),
        lambda d: fit_rk(d, "matern32"),
        lambda d: fit_ok(d, "rq"),
        lambda d: fit_uk(d, RegressionBasis.linear(2), "gaussian", "rational"),
        lambda d: fit_uk(d, RegressionBasis.constant(), "exp", "plain"),
    ],
)
def test_round_trip_predictions(tmp_path, fit):
    model = fit(data2d())
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    q = np.random.default_rng(1).uniform(size=(100, 2))
    a, b = model.predict(q), loaded.predict(q)
    np.testing.assert_allclose(b.mean, a.mean, rtol=0, atol=1e-12)
    np.testing.assert_allclose(b.sd, a.sd, rtol=0, atol=1e-12)
    assert type(loaded) is type(model)


def test_document_header():
    doc = model_to_dict(fit_rk(data2d()))
    assert doc["format"] == "ratkrig-model" and doc["version"] == 1 and doc["kind"] == "rk"
    json.dumps(doc)


def test_corrupted_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{ not json")
    with pytest.raises(ModelFileError):
        load_model(p)
    p.write_text(json.dumps({"format": "something-else"}))
    with pytest.raises(ModelFileError):
        load_model(p)


def test_tampered_coefficients(tmp_path):
    doc = model_to_dict(fit_rk(data2d()))
    doc["params"]["c_hat"][0] += 0.5
    p = tmp_path / "m.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ModelFileError):
        load_model(p)


def test_missing_field_fixture():
    with pytest.raises(VersionError, match="gamma_hat"):
        load_model(FIXTURE)


def test_other_version(tmp_path):
    doc = model_to_dict(fit_ok(data2d()))
    doc["version"] = 2
    p = tmp_path / "m.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(VersionError):
        load_model(p)


def test_custom_basis_not_saved():
    basis = RegressionBasis.from_callables([lambda X: np.ones(len(X)), lambda X: X[:, 0] ** 2])
    model = fit_uk(data2d(), basis)
    with pytest.raises(ModelFileError):
        model_to_dict(model)
