"""Latent patient state, the declared causal graph, and action validation.

The state transition is a transparent deterministic fold: a bounded window
of recent observations plus exponentially weighted mean/variance per
feature. Learned recurrent cores can replace it later behind the same
``featurize`` layout, which is the plug-in seam the predictive models
consume. The causal graph is a fixed declared artifact, not estimated from
data; it gates which action variables may be perturbed at all.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime

import numpy as np

from .errors import LayoutMismatchError
from .models import TrainedModel, predict

DEFAULT_ALPHA = 0.3
DEFAULT_WINDOW = 12

GLUCOSE = "glucose"
ACTION_NODE_BY_FIELD = {
    "carbs_g": "nutrition",
    "activity_min": "activity",
    "activity_start_min": "timing",
    "insulin_units": "insulin",
}
DEFAULT_FEASIBLE_RANGES = {
    "carbs_g": (0.0, 200.0),
    "activity_min": (0.0, 60.0),
    "activity_start_min": (0.0, 120.0),
    "insulin_units": (0.0, 50.0),
}


@dataclass(frozen=True)
class Action:
    carbs_g: float = 0.0
    activity_min: float = 0.0
    activity_start_min: float = 0.0
    insulin_units: float = 0.0   # reserved; scenario suite never doses insulin

    def as_vector(self) -> np.ndarray:
        return np.array([self.carbs_g, self.activity_min,
                         self.activity_start_min, self.insulin_units])


@dataclass(frozen=True)
class Violation:
    variable: str
    value: float
    bound: tuple[float, float]

    def __str__(self):
        lo, hi = self.bound
        return f"{self.variable}={self.value} outside feasible range [{lo}, {hi}]"

    def to_dict(self):
        return {"variable": self.variable, "value": self.value,
                "bound": list(self.bound)}


class CausalGraph:
    """Directed acyclic graph over the intervention variables and glucose."""

    def __init__(self, nodes=None, edges=None):
        self.nodes = set(nodes) if nodes is not None else {
            "nutrition", "activity", "insulin", "timing", GLUCOSE,
        }
        self.edges = set(map(tuple, edges)) if edges is not None else {
            ("nutrition", GLUCOSE), ("activity", GLUCOSE),
            ("insulin", GLUCOSE), ("timing", GLUCOSE),
        }
        for a, b in self.edges:
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge ({a}, {b}) references unknown node")
            if a == GLUCOSE:
                raise ValueError("glucose must not have outgoing edges")
        if self._has_cycle():
            raise ValueError("causal graph must be acyclic")

    def _has_cycle(self) -> bool:
        out = {n: [] for n in self.nodes}
        for a, b in self.edges:
            out[a].append(b)
        WHITE, GRAY, BLACK = 0, 1, 2
        color = {n: WHITE for n in self.nodes}

        def visit(n):
            color[n] = GRAY
            for m in out[n]:
                if color[m] == GRAY:
                    return True
                if color[m] == WHITE and visit(m):
                    return True
            color[n] = BLACK
            return False

        return any(visit(n) for n in self.nodes if color[n] == WHITE)

    def parents_of_glucose(self) -> set[str]:
        return {a for a, b in self.edges if b == GLUCOSE}

    def to_json(self) -> str:
        return json.dumps({"nodes": sorted(self.nodes),
                           "edges": sorted(map(list, self.edges))}, indent=2)

    @classmethod
    def from_json(cls, text: str | bytes) -> "CausalGraph":
        doc = json.loads(text)
        return cls(doc["nodes"], [tuple(e) for e in doc["edges"]])


def validate_action(graph: CausalGraph, action: Action,
                    feasible_ranges: dict | None = None) -> list[Violation]:
    """Empty list means the action is admissible.

    Every nonzero component must map to a node with an edge into glucose
    and lie inside its feasible range; negative components are always
    infeasible.
    """
    ranges = feasible_ranges if feasible_ranges is not None else DEFAULT_FEASIBLE_RANGES
    parents = graph.parents_of_glucose()
    violations = []
    for fieldname, node in ACTION_NODE_BY_FIELD.items():
        value = getattr(action, fieldname)
        lo, hi = ranges.get(fieldname, (0.0, 0.0))
        if value == 0:
            continue
        if node not in parents:
            violations.append(Violation(fieldname, value, (0.0, 0.0)))
            continue
        if not lo <= value <= hi:
            violations.append(Violation(fieldname, value, (lo, hi)))
    return violations


@dataclass(frozen=True)
class PatientState:
    patient_id: str
    window: tuple[tuple[datetime, np.ndarray], ...]
    ew_mean: np.ndarray
    ew_var: np.ndarray
    last_updated: datetime
    alpha: float = DEFAULT_ALPHA
    window_size: int = DEFAULT_WINDOW


def init_state(patient_id: str, timestamp: datetime, x0: np.ndarray,
               alpha: float = DEFAULT_ALPHA, window_size: int = DEFAULT_WINDOW) -> PatientState:
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial observation must be finite")
    return PatientState(
        patient_id=patient_id,
        window=((timestamp, x0),),
        ew_mean=x0.copy(),
        ew_var=np.zeros_like(x0),
        last_updated=timestamp,
        alpha=alpha,
        window_size=window_size,
    )


def update_state(state: PatientState, timestamp: datetime, x: np.ndarray) -> PatientState:
    """Fold one observation: append to the window (evicting beyond capacity)
    and advance the exponentially weighted moments."""
    x = np.asarray(x, dtype=float)
    if timestamp <= state.last_updated:
        raise ValueError(
            f"out-of-order observation: {timestamp} <= {state.last_updated}"
        )
    if x.shape != state.ew_mean.shape:
        raise ValueError("observation dimension changed")
    a = state.alpha
    mean_prev = state.ew_mean
    ew_mean = (1 - a) * mean_prev + a * x
    ew_var = (1 - a) * (state.ew_var + a * (x - mean_prev) ** 2)
    window = state.window + ((timestamp, x),)
    if len(window) > state.window_size:
        window = window[-state.window_size:]
    return replace(state, window=window, ew_mean=ew_mean, ew_var=ew_var,
                   last_updated=timestamp)


def featurize(state: PatientState, action: Action) -> np.ndarray:
    """Fixed layout: [ew_mean | sqrt(ew_var) | latest observation | action]."""
    latest = state.window[-1][1]
    return np.concatenate([state.ew_mean, np.sqrt(state.ew_var), latest,
                           action.as_vector()])


def feature_layout(n_obs_features: int) -> tuple[str, ...]:
    names = [f"ew_mean_{i}" for i in range(n_obs_features)]
    names += [f"ew_std_{i}" for i in range(n_obs_features)]
    names += [f"latest_{i}" for i in range(n_obs_features)]
    names += ["carbs_g", "activity_min", "activity_start_min", "insulin_units"]
    return tuple(names)


def predict_outcome(state: PatientState, action: Action, horizon_min: float,
                    model: TrainedModel) -> float:
    """Score one candidate action with a model trained on the featurize layout.

    The horizon joins the feature vector only when the model was trained
    with a ``horizon_min`` slot.
    """
    vec = featurize(state, action)
    if model.feature_layout is not None and "horizon_min" in model.feature_layout:
        vec = np.concatenate([vec, [horizon_min]])
    if len(vec) != model.n_features:
        raise LayoutMismatchError(
            f"model expects {model.n_features} features, featurize produced {len(vec)}"
        )
    expected = feature_layout(len(state.ew_mean))
    if model.feature_layout is not None:
        base = tuple(n for n in model.feature_layout if n != "horizon_min")
        if base != expected:
            raise LayoutMismatchError("model feature layout does not match featurize order")
    return float(predict(model, vec.reshape(1, -1))[0])


def state_to_json(state: PatientState) -> str:
    return json.dumps({
        "format_version": 1,
        "patient_id": state.patient_id,
        "alpha": state.alpha,
        "window_size": state.window_size,
        "last_updated": state.last_updated.isoformat(),
        "ew_mean": state.ew_mean.tolist(),
        "ew_var": state.ew_var.tolist(),
        "window": [[ts.isoformat(), x.tolist()] for ts, x in state.window],
    })


def state_from_json(text: str | bytes) -> PatientState:
    doc = json.loads(text)
    if doc.get("format_version") != 1:
        raise ValueError(f"unsupported state format version {doc.get('format_version')!r}")
    window = tuple(
        (datetime.fromisoformat(ts), np.asarray(x, dtype=float)) for ts, x in doc["window"]
    )
    return PatientState(
        patient_id=doc["patient_id"],
        window=window,
        ew_mean=np.asarray(doc["ew_mean"], dtype=float),
        ew_var=np.asarray(doc["ew_var"], dtype=float),
        last_updated=datetime.fromisoformat(doc["last_updated"]),
        alpha=doc["alpha"],
        window_size=doc["window_size"],
    )
