"""Gradient-boosted and bagged tree ensembles.

Boosting is plain squared-loss stagewise fitting: start from the target
mean, fit each depth-limited tree to the current residuals, and add it
with constant shrinkage (the per-stage weight is the learning rate).

Forests bag unpruned trees over bootstrap resamples with per-split feature
subsampling. Every tree derives its randomness from a (seed, tree_index)
substream, so construction order cannot affect the result. Classification
trees are the same variance-reduction trees fit on 0/1 labels: a leaf
stores its class-1 fraction and the forest probability is the mean across
trees, which for fully grown (pure-leaf) trees equals the vote fraction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .base import CLASSIFICATION, REGRESSION, TrainedModel, fingerprint
from .tree import grow_tree


@dataclass(frozen=True)
class GbmConfig:
    n_estimators: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_samples_leaf: int = 2

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be at least 1")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must be in (0, 1]")


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None          # None = grow until pure
    features_per_split: int | None = None  # None = ceil(sqrt(d))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")


def _as_config_dict(cfg) -> dict:
    d = dict(cfg.__dict__)
    return d


def train_gbm(X: np.ndarray, y: np.ndarray, cfg: GbmConfig = GbmConfig(),
              task: str = REGRESSION,
              feature_layout: tuple[str, ...] | None = None) -> TrainedModel:
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(X) < 2 * cfg.min_samples_leaf:
        raise TrainingError(
            f"need at least {2 * cfg.min_samples_leaf} samples, got {len(X)}"
        )
    f0 = float(y.mean())
    pred = np.full(len(y), f0)
    trees = []
    for _ in range(cfg.n_estimators):
        t = grow_tree(X, y - pred, max_depth=cfg.max_depth,
                      min_samples_leaf=cfg.min_samples_leaf)
        pred += cfg.learning_rate * t.predict(X)
        trees.append(t)
    config = _as_config_dict(cfg)
    return TrainedModel(
        kind="gbm", task=task, config=config,
        params={"f0": f0, "shrinkage": cfg.learning_rate, "trees": trees},
        n_features=X.shape[1],
        fingerprint=fingerprint("gbm", task, config, X, y),
        feature_layout=feature_layout,
    )


def train_forest(X: np.ndarray, y: np.ndarray, cfg: ForestConfig = ForestConfig(),
                 task: str = REGRESSION,
                 feature_layout: tuple[str, ...] | None = None) -> TrainedModel:
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(X) < 2:
        raise TrainingError("need at least 2 samples")
    if task == CLASSIFICATION and not np.array_equal(np.unique(y), [0, 1]):
        raise TrainingError("classification forest needs 0/1 labels with both classes")
    d = X.shape[1]
    k = cfg.features_per_split if cfg.features_per_split is not None else math.ceil(math.sqrt(d))
    trees = []
    for i in range(cfg.n_trees):
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, i)))
        if cfg.bootstrap:
            sample = rng.integers(0, len(y), len(y))
            Xs, ys = X[sample], y[sample]
        else:
            Xs, ys = X, y
        node_seed = int(rng.integers(0, 2 ** 63))
        trees.append(grow_tree(Xs, ys, max_depth=cfg.max_depth,
                               min_samples_leaf=1, features_per_split=k,
                               node_seed=node_seed))
    config = _as_config_dict(cfg)
    return TrainedModel(
        kind="forest", task=task, config=config,
        params={"trees": trees},
        n_features=d,
        fingerprint=fingerprint("forest", task, config, X, y),
        feature_layout=feature_layout,
    )
