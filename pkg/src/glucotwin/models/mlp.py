"""Single-hidden-layer perceptron trained with Adam on squared loss.

Weights initialize uniformly in +/- sqrt(6 / (fan_in + fan_out)). For
regression the targets are standardized internally and predictions are
un-standardized on the way out; classification trains directly on the 0/1
labels. Epoch shuffling and initialization come from one seeded stream, so
training is a pure function of (X, y, config).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .base import REGRESSION, TrainedModel, fingerprint


@dataclass(frozen=True)
class MlpConfig:
    hidden_units: int = 64
    step_size: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 500
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be at least 1")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


def init_params(n_features: int, hidden: int, rng: np.random.Generator) -> dict:
    lim1 = np.sqrt(6.0 / (n_features + hidden))
    lim2 = np.sqrt(6.0 / (hidden + 1))
    return {
        "w1": rng.uniform(-lim1, lim1, (n_features, hidden)),
        "b1": np.zeros(hidden),
        "w2": rng.uniform(-lim2, lim2, hidden),
        "b2": 0.0,
    }


def loss_and_grads(params: dict, X: np.ndarray, y: np.ndarray) -> tuple[float, dict]:
    """Mean squared error and its analytic gradients (backprop)."""
    h_pre = X @ params["w1"] + params["b1"]
    h = np.maximum(h_pre, 0.0)
    out = h @ params["w2"] + params["b2"]
    err = out - y
    loss = float(np.mean(err ** 2))
    n = len(y)
    d_out = 2.0 * err / n
    g_w2 = h.T @ d_out
    g_b2 = float(d_out.sum())
    d_h = np.outer(d_out, params["w2"]) * (h_pre > 0)
    g_w1 = X.T @ d_h
    g_b1 = d_h.sum(axis=0)
    return loss, {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": g_b2}


def train_mlp(X: np.ndarray, y: np.ndarray, cfg: MlpConfig = MlpConfig(),
              task: str = REGRESSION,
              feature_layout: tuple[str, ...] | None = None) -> TrainedModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(X) == 0:
        raise TrainingError("cannot train on zero samples")
    if task == REGRESSION:
        y_mean = float(y.mean())
        y_std = float(y.std())
        if y_std == 0:
            y_std = 1.0
        yt = (y - y_mean) / y_std
    else:
        y_mean, y_std = 0.0, 1.0
        yt = y

    rng = np.random.default_rng(cfg.seed)
    params = init_params(X.shape[1], cfg.hidden_units, rng)
    m = {k: np.zeros_like(np.asarray(v, dtype=float)) for k, v in params.items()}
    v = {k: np.zeros_like(np.asarray(val, dtype=float)) for k, val in params.items()}
    batch = min(cfg.batch_size, len(X))

    t = 0
    with np.errstate(over="ignore", invalid="ignore"):  # divergence is caught via the loss
        for epoch in range(cfg.epochs):
            order = rng.permutation(len(X))
            for start in range(0, len(X), batch):
                sel = order[start:start + batch]
                loss, grads = loss_and_grads(params, X[sel], yt[sel])
                if not np.isfinite(loss):
                    raise TrainingError(f"non-finite loss at epoch {epoch}")
                t += 1
                for key in params:
                    g = grads[key]
                    m[key] = cfg.beta1 * m[key] + (1 - cfg.beta1) * g
                    v[key] = cfg.beta2 * v[key] + (1 - cfg.beta2) * np.square(g)
                    m_hat = m[key] / (1 - cfg.beta1 ** t)
                    v_hat = v[key] / (1 - cfg.beta2 ** t)
                    params[key] = params[key] - cfg.step_size * m_hat / (np.sqrt(v_hat) + cfg.eps)

    config = dict(cfg.__dict__)
    return TrainedModel(
        kind="mlp", task=task, config=config,
        params={"w1": params["w1"], "b1": params["b1"], "w2": params["w2"],
                "b2": float(params["b2"]), "y_mean": y_mean, "y_std": y_std},
        n_features=X.shape[1],
        fingerprint=fingerprint("mlp", task, config, X, y),
        feature_layout=feature_layout,
    )
