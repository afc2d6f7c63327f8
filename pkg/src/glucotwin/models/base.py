"""Trained-model container, prediction dispatch, and JSON round-trip.

A :class:`TrainedModel` is an immutable value: training functions produce
it, ``predict``/``predict_proba`` are pure functions of (parameters,
input). The JSON form is versioned and must reproduce predictions
bit-exactly (Python's float repr guarantees lossless round-trips).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from ..errors import LayoutMismatchError
from .tree import Tree

FORMAT_VERSION = 1
REGRESSION = "regression"
CLASSIFICATION = "classification"


@dataclass(frozen=True)
class TrainedModel:
    kind: str                    # linear | logistic | forest | gbm | mlp
    task: str                    # regression | classification
    config: dict
    params: dict
    n_features: int
    fingerprint: str
    feature_layout: tuple[str, ...] | None = None


def fingerprint(kind: str, task: str, config: dict, X: np.ndarray, y: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(kind.encode())
    h.update(task.encode())
    h.update(json.dumps(config, sort_keys=True).encode())
    Xc = np.ascontiguousarray(X, dtype=np.float64)
    yc = np.ascontiguousarray(y, dtype=np.float64)
    h.update(str(Xc.shape).encode())
    h.update(Xc.tobytes())
    h.update(yc.tobytes())
    return h.hexdigest()


def _check_dim(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != model.n_features:
        raise LayoutMismatchError(
            f"model expects {model.n_features} features, got {X.shape[1]}"
        )
    return X


def _raw_score(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    p = model.params
    if model.kind in ("linear", "logistic"):
        return X @ np.asarray(p["coef"]) + p["intercept"]
    if model.kind == "gbm":
        out = np.full(len(X), p["f0"], dtype=float)
        for t in p["trees"]:
            out += p["shrinkage"] * t.predict(X)
        return out
    if model.kind == "forest":
        acc = np.zeros(len(X), dtype=float)
        for t in p["trees"]:
            acc += t.predict(X)
        return acc / len(p["trees"])
    if model.kind == "mlp":
        h = np.maximum(X @ p["w1"] + p["b1"], 0.0)
        out = h @ p["w2"] + p["b2"]
        if model.task == REGRESSION:
            out = out * p["y_std"] + p["y_mean"]
        return out
    raise ValueError(f"unknown model kind {model.kind!r}")


def predict(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Point predictions: values for regression, 0/1 labels for classification."""
    X = _check_dim(model, X)
    if model.task == CLASSIFICATION:
        return (predict_proba(model, X) > 0.5).astype(float)
    return _raw_score(model, X)


def predict_proba(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Class-1 probabilities in [0, 1]; only defined for classifiers."""
    if model.task != CLASSIFICATION:
        raise ValueError(f"{model.kind} model was trained for regression, has no probabilities")
    X = _check_dim(model, X)
    if model.kind == "logistic":
        z = X @ np.asarray(model.params["coef"]) + model.params["intercept"]
        return 1.0 / (1.0 + np.exp(-z))
    if model.kind == "forest":
        return _raw_score(model, X)          # mean class-1 leaf fraction across trees
    if model.kind in ("gbm", "mlp"):
        return np.clip(_raw_score(model, X), 0.0, 1.0)
    raise ValueError(f"{model.kind} cannot produce probabilities")


def _params_to_doc(kind: str, params: dict) -> dict:
    doc = {}
    for k, v in params.items():
        if k == "trees":
            doc[k] = [t.to_dict() for t in v]
        elif isinstance(v, np.ndarray):
            doc[k] = v.tolist()
        else:
            doc[k] = v
    return doc


def _params_from_doc(kind: str, doc: dict) -> dict:
    params = {}
    for k, v in doc.items():
        if k == "trees":
            params[k] = [Tree.from_dict(t) for t in v]
        elif isinstance(v, list):
            params[k] = np.asarray(v, dtype=float)
        else:
            params[k] = v
    return params


def model_to_json(model: TrainedModel) -> str:
    return json.dumps({
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "task": model.task,
        "config": model.config,
        "n_features": model.n_features,
        "feature_layout": list(model.feature_layout) if model.feature_layout else None,
        "fingerprint": model.fingerprint,
        "params": _params_to_doc(model.kind, model.params),
    })


def model_from_json(text: str | bytes) -> TrainedModel:
    doc = json.loads(text)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('format_version')!r}")
    layout = doc.get("feature_layout")
    return TrainedModel(
        kind=doc["kind"],
        task=doc["task"],
        config=doc["config"],
        params=_params_from_doc(doc["kind"], doc["params"]),
        n_features=doc["n_features"],
        fingerprint=doc["fingerprint"],
        feature_layout=tuple(layout) if layout else None,
    )
