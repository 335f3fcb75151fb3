"""Versioned JSON documents for fitted models.

A document stores the kernel, the training data and the fitted
quantities. Loading rebuilds the model from kernel and data (the build is
deterministic) and checks the stored coefficients against the rebuild.

Schema, version 1::

    {"format": "ratkrig-model", "version": 1, "kind": "rk" | "ok" | "uk",
     "kernel": {"family": str, "lengthscales": [float], "nugget": float},
     "data": {"X": [[float]], "y": [float]},
     "params": {...kind specific...}}

``uk`` documents also carry ``"basis": {"kind": "constant" | "linear", "dim": int}``
and ``"variant": "plain" | "rational"``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ratkrig.errors import ModelFileError, VersionError
from ratkrig.kernels import DataSet, KernelSpec
from ratkrig.krige import FittedOK, FittedRK, build_ok, build_rk
from ratkrig.universal import FittedUK, RegressionBasis, build_uk

FORMAT = "ratkrig-model"
VERSION = 1

_PARAMS = {
    "rk": ("c_hat", "gamma_hat", "delta", "mu", "nu2"),
    "ok": ("mu_ok", "tau2"),
    "uk": ("beta_hat", "nu2", "delta"),
}


def _kernel_doc(spec: KernelSpec) -> dict:
    return {
        "family": spec.family,
        "lengthscales": spec.lengthscales.tolist(),
        "nugget": spec.nugget,
    }


def model_to_dict(model) -> dict:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kernel": _kernel_doc(model.spec),
        "data": {"X": model.data.X.tolist(), "y": model.data.y.tolist()},
    }
    if isinstance(model, FittedRK):
        doc["kind"] = "rk"
        doc["params"] = {
            "c_hat": model.c_hat.tolist(),
            "gamma_hat": model.gamma_hat,
            "delta": model.delta,
            "mu": model.mu,
            "nu2": model.nu2,
        }
    elif isinstance(model, FittedOK):
        doc["kind"] = "ok"
        doc["params"] = {"mu_ok": model.mu_ok, "tau2": model.tau2}
    elif isinstance(model, FittedUK):
        if model.basis.kind not in ("constant", "linear"):
            raise ModelFileError("only built-in regression bases can be saved")
        doc["kind"] = "uk"
        doc["variant"] = model.variant
        doc["basis"] = {"kind": model.basis.kind, "dim": model.basis.dim}
        doc["params"] = {
            "beta_hat": model.beta_hat.tolist(),
            "nu2": model.nu2,
            "delta": model.delta,
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return doc


def _require(doc: dict, key: str, where: str = "document"):
    if key not in doc:
        raise VersionError(
            f"{where} lacks field {key!r}; it was not written by format version {VERSION}"
        )
    return doc[key]


def model_from_dict(doc) -> FittedRK | FittedOK | FittedUK:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFileError("not a ratkrig model document")
    version = _require(doc, "version")
    if version != VERSION:
        raise VersionError(f"model format version {version} is not supported (expected {VERSION})")
    kind = _require(doc, "kind")
    if kind not in _PARAMS:
        raise ModelFileError(f"unknown model kind {kind!r}")
    kdoc = _require(doc, "kernel")
    ddoc = _require(doc, "data")
    params = _require(doc, "params")
    for key in _PARAMS[kind]:
        _require(params, key, "params")
    try:
        spec = KernelSpec(
            _require(kdoc, "family", "kernel"),
            _require(kdoc, "lengthscales", "kernel"),
            _require(kdoc, "nugget", "kernel"),
        )
        data = DataSet(_require(ddoc, "X", "data"), _require(ddoc, "y", "data"))
    except (TypeError, ValueError) as exc:
        raise ModelFileError(f"malformed model document: {exc}") from None

    if kind == "rk":
        model = build_rk(data, spec, params["delta"])
        stored = np.asarray(params["c_hat"], dtype=float)
        rebuilt = model.c_hat
    elif kind == "ok":
        model = build_ok(data, spec)
        stored, rebuilt = np.array([params["mu_ok"]]), np.array([model.mu_ok])
    else:
        bdoc = _require(doc, "basis")
        bkind = _require(bdoc, "kind", "basis")
        if bkind == "constant":
            basis = RegressionBasis.constant()
        elif bkind == "linear":
            basis = RegressionBasis.linear(int(_require(bdoc, "dim", "basis")))
        else:
            raise ModelFileError(f"unknown basis kind {bkind!r}")
        model = build_uk(data, basis, spec, _require(doc, "variant"), params["delta"])
        stored, rebuilt = np.asarray(params["beta_hat"], dtype=float), model.beta_hat
    if stored.shape != rebuilt.shape or not np.allclose(stored, rebuilt, rtol=1e-8, atol=1e-12):
        raise ModelFileError("stored coefficients do not match the rebuilt model")
    return model


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(doc)
