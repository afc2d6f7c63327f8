"""Linear least squares and logistic regression."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .base import CLASSIFICATION, REGRESSION, TrainedModel, fingerprint

RIDGE_LAMBDA = 1e-8
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class LogisticConfig:
    step: float = 1.0
    max_iter: int = 10_000
    tol: float = 1e-6


def train_linear(X: np.ndarray, y: np.ndarray,
                 feature_layout: tuple[str, ...] | None = None) -> TrainedModel:
    """Ordinary least squares via normal equations.

    A ridge term kicks in only when the Gram matrix is numerically singular
    (condition estimate beyond 1e12), so well-posed problems stay exact.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(X) == 0:
        raise TrainingError("cannot fit a linear model on zero samples")
    A = np.hstack([X, np.ones((len(X), 1))])
    G = A.T @ A
    rhs = A.T @ y
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        G = G + RIDGE_LAMBDA * np.eye(G.shape[0])
    w = np.linalg.solve(G, rhs)
    cfg = {"ridge_lambda": RIDGE_LAMBDA}
    return TrainedModel(
        kind="linear", task=REGRESSION, config=cfg,
        params={"coef": w[:-1], "intercept": float(w[-1])},
        n_features=X.shape[1],
        fingerprint=fingerprint("linear", REGRESSION, cfg, X, y),
        feature_layout=feature_layout,
    )


def train_logistic(X: np.ndarray, y: np.ndarray,
                   config: LogisticConfig = LogisticConfig(),
                   feature_layout: tuple[str, ...] | None = None) -> TrainedModel:
    """Full-batch gradient ascent on the mean log-likelihood with a fixed step.

    Features are standardized internally for conditioning and the
    standardization is folded back into the returned coefficients, so the
    model scores raw inputs.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    classes = np.unique(y)
    if not np.array_equal(classes, [0, 1]):
        if len(classes) < 2:
            raise TrainingError("logistic regression needs both classes present")
        raise TrainingError(f"labels must be 0/1, got {classes}")

    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd == 0, 1.0, sd)
    A = np.hstack([(X - mu) / sd, np.ones((len(X), 1))])
    w = np.zeros(A.shape[1])
    for _ in range(config.max_iter):
        p = 1.0 / (1.0 + np.exp(-(A @ w)))
        g = A.T @ (y - p) / len(y)
        if np.max(np.abs(g)) < config.tol:
            break
        w = w + config.step * g

    coef = w[:-1] / sd
    intercept = float(w[-1] - (mu / sd) @ w[:-1])
    cfg = {"step": config.step, "max_iter": config.max_iter, "tol": config.tol}
    return TrainedModel(
        kind="logistic", task=CLASSIFICATION, config=cfg,
        params={"coef": coef, "intercept": intercept},
        n_features=X.shape[1],
        fingerprint=fingerprint("logistic", CLASSIFICATION, cfg, X, y),
        feature_layout=feature_layout,
    )
