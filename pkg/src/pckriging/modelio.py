"""JSON persistence for fitted models.

Files carry a format tag, the model kind, optional provenance metadata
(seed, config hash), and a payload with full-precision numbers. Loading
a Kriging-backed model rebuilds the cached factorization from the stored
kernel, nugget, and trend coefficients, so a round trip predicts
identically to the in-memory model.
"""

import json

import numpy as np
import scipy.linalg

from .doe import ExperimentalDesign, InputModel
from .exceptions import DataError
from .kriging import Kernel, KrigingModel, TrendBasis, corr_matrix
from .orthopoly import IndexSet, PolyBasis
from .pce import LarPath, PceModel
from .pck import PckModel

FORMAT = "pckriging-model"
VERSION = 1


def _floats(arr) -> list:
    return [float(v) for v in np.asarray(arr, dtype=float).ravel()]


def _nan_to_none(arr) -> list:
    return [None if np.isnan(v) else float(v) for v in np.asarray(arr, dtype=float)]


def _none_to_nan(vals) -> np.ndarray:
    return np.array([np.nan if v is None else float(v) for v in vals])


def _index_set_dict(s: IndexSet) -> dict:
    return {"indices": s.to_list(), "dim": s.dim, "degree": s.degree, "q": s.q}


def _index_set_from(d: dict) -> IndexSet:
    return IndexSet(
        tuple(tuple(int(k) for k in a) for a in d["indices"]),
        int(d["dim"]),
        int(d["degree"]),
        float(d["q"]),
    )


def _basis_dict(b: PolyBasis) -> dict:
    return {
        "input": b.input.to_dict(),
        "index_set": _index_set_dict(b.index_set),
        "families": list(b.families),
    }


def _basis_from(d: dict) -> PolyBasis:
    return PolyBasis.for_input(InputModel.from_dict(d["input"]), _index_set_from(d["index_set"]))


def _design_dict(design: ExperimentalDesign) -> dict:
    out = {"points": [[float(v) for v in row] for row in design.points]}
    if design.responses is not None:
        out["responses"] = _floats(design.responses)
    return out


def _design_from(d: dict) -> ExperimentalDesign:
    return ExperimentalDesign(np.asarray(d["points"]), d.get("responses"))


def _pce_dict(m: PceModel) -> dict:
    return {
        "basis": _basis_dict(m.basis),
        "coeffs": _floats(m.coeffs),
        "loo_error": m.loo_error,
        "emp_error": m.emp_error,
    }


def _pce_from(d: dict) -> PceModel:
    return PceModel(
        _basis_from(d["basis"]),
        np.asarray(d["coeffs"]),
        float(d["loo_error"]),
        float(d["emp_error"]),
    )


def _trend_dict(t: TrendBasis) -> dict:
    out = {"kind": t.kind}
    if t.basis is not None:
        out["basis"] = _basis_dict(t.basis)
    return out


def _trend_from(d: dict) -> TrendBasis:
    if d["kind"] == TrendBasis.CONSTANT:
        return TrendBasis.constant()
    return TrendBasis.polynomials(_basis_from(d["basis"]))


def _kriging_dict(m: KrigingModel) -> dict:
    return {
        "trend": _trend_dict(m.trend),
        "kernel": {
            "kind": m.kernel.kind,
            "lengthscales": list(m.kernel.lengthscales),
            "nu": m.kernel.nu,
        },
        "beta": _floats(m.beta),
        "sigma2": m.sigma2,
        "nugget": m.nugget,
        "design": _design_dict(m.design),
        "calibration": m.calibration,
    }


def _kriging_from(d: dict) -> KrigingModel:
    kernel = Kernel(
        d["kernel"]["kind"],
        tuple(d["kernel"]["lengthscales"]),
        d["kernel"].get("nu"),
    )
    trend = _trend_from(d["trend"])
    design = _design_from(d["design"])
    beta = np.asarray(d["beta"])
    nugget = float(d["nugget"])
    # rebuild the cached solves at the stored nugget and coefficients
    R = corr_matrix(kernel, design.points) + nugget * np.eye(design.n)
    C = scipy.linalg.cholesky(R, lower=True)
    F = trend.evaluate(design.points)
    Ft = scipy.linalg.solve_triangular(C, F, lower=True)
    _, G = np.linalg.qr(Ft, mode="reduced")
    resid = design.responses - F @ beta
    gamma = scipy.linalg.cho_solve((C, True), resid)
    return KrigingModel(
        trend=trend,
        kernel=kernel,
        beta=beta,
        sigma2=float(d["sigma2"]),
        design=design,
        nugget=nugget,
        calibration=d.get("calibration", {}),
        _chol=C,
        _Ft=Ft,
        _G=G,
        _gamma=gamma,
    )


def _pck_dict(m: PckModel) -> dict:
    return {
        "variant": m.variant,
        "model": _kriging_dict(m.model),
        "lar_path": {
            "ranked_indices": [list(a) for a in m.lar_path.ranked_indices],
            "loo": _nan_to_none(m.lar_path.loo),
        },
        "selected_size": m.selected_size,
        "loo": m.loo,
        "loo_curve": None if m.loo_curve is None else _nan_to_none(m.loo_curve),
    }


def _pck_from(d: dict) -> PckModel:
    path = LarPath(
        tuple(tuple(int(k) for k in a) for a in d["lar_path"]["ranked_indices"]),
        _none_to_nan(d["lar_path"]["loo"]),
    )
    curve = d.get("loo_curve")
    return PckModel(
        variant=d["variant"],
        model=_kriging_from(d["model"]),
        lar_path=path,
        selected_size=int(d["selected_size"]),
        loo=float(d["loo"]),
        loo_curve=None if curve is None else _none_to_nan(curve),
    )


def save_model(model, path, meta: dict | None = None) -> None:
    """Write a model to JSON; meta (seed, config hash, ...) is stored as-is."""
    if isinstance(model, PceModel):
        kind, payload = "pce", _pce_dict(model)
    elif isinstance(model, KrigingModel):
        kind, payload = "kriging", _kriging_dict(model)
    elif isinstance(model, PckModel):
        kind, payload = "pck", _pck_dict(model)
    else:
        raise DataError(f"cannot persist object of type {type(model).__name__}")
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kind": kind,
        "rng": "philox",
        "meta": meta or {},
        "payload": payload,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path):
    """Load any persisted model; returns PceModel, KrigingModel, or PckModel."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot load model file {path}: {exc}") from exc
    if doc.get("format") != FORMAT:
        raise DataError(f"{path} is not a {FORMAT} file")
    kind = doc.get("kind")
    payload = doc.get("payload", {})
    if kind == "pce":
        return _pce_from(payload)
    if kind == "kriging":
        return _kriging_from(payload)
    if kind == "pck":
        return _pck_from(payload)
    raise DataError(f"unknown model kind {kind!r} in {path}")
