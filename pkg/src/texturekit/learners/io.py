"""JSON model files with a fixed key order so identical models give identical bytes."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ModelFormatError
from .forest import ForestModel
from .svm import SVMModel, SVMParams
from .tree import RFParams, Tree

FORMAT_VERSION = 1


def _floats(a) -> list[float]:
    return [float(v) for v in np.ravel(a)]


def model_to_dict(m) -> dict:
    if isinstance(m, ForestModel):
        doc = {
            "format_version": FORMAT_VERSION,
            "kind": m.kind,
            "params": m.params.to_dict(),
            "feature_names": list(m.feature_names),
            "trees": [t.to_dict() for t in m.trees],
            "train_fingerprint": m.train_fingerprint,
        }
    elif isinstance(m, SVMModel):
        doc = {
            "format_version": FORMAT_VERSION,
            "kind": m.kind,
            "params": m.params.to_dict(),
            "feature_names": list(m.feature_names),
            "support_vectors": [_floats(r) for r in m.support_vectors],
            "dual_coef": _floats(m.dual_coef),
            "bias": float(m.bias),
            "gamma": float(m.gamma),
            "column_mean": _floats(m.column_mean),
            "column_scale": _floats(m.column_scale),
            "platt": [float(m.platt_a), float(m.platt_b)],
            "converged": bool(m.converged),
            "iterations": int(m.iterations),
            "train_fingerprint": m.train_fingerprint,
        }
    else:
        raise TypeError(f"cannot serialize {type(m).__name__}")
    if m.extra:
        doc["extra"] = m.extra
    return doc


def model_from_dict(doc: dict):
    try:
        if doc.get("format_version") != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format_version {doc.get('format_version')!r}")
        kind = doc["kind"]
        names = tuple(doc["feature_names"])
        if kind == ForestModel.kind:
            trees = [Tree.from_dict(t) for t in doc["trees"]]
            for t in trees:
                t.validate(len(names))
            if not trees:
                raise ModelFormatError("forest has no trees")
            return ForestModel(trees, RFParams(**doc["params"]), names, doc["train_fingerprint"],
                               doc.get("extra", {}))
        if kind == SVMModel.kind:
            sv = np.asarray(doc["support_vectors"], dtype=np.float64).reshape(-1, len(names))
            return SVMModel(SVMParams(**doc["params"]), names, sv, np.asarray(doc["dual_coef"], dtype=np.float64),
                            float(doc["bias"]), float(doc["gamma"]), np.asarray(doc["column_mean"]),
                            np.asarray(doc["column_scale"]), float(doc["platt"][0]), float(doc["platt"][1]),
                            bool(doc["converged"]), int(doc["iterations"]), doc["train_fingerprint"],
                            extra=doc.get("extra", {}))
        raise ModelFormatError(f"unknown model kind {kind!r}")
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc


def dumps_model(m) -> str:
    return json.dumps(model_to_dict(m), separators=(",", ":"), allow_nan=False) + "\n"


def save_model(m, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(m))
    return path


def load_model(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not a valid model file ({exc.msg})") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: model file must hold a JSON object")
    return model_from_dict(doc)
