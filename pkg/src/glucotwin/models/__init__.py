from .base import (
    CLASSIFICATION,
    REGRESSION,
    TrainedModel,
    model_from_json,
    model_to_json,
    predict,
    predict_proba,
)
from .ensemble import ForestConfig, GbmConfig, train_forest, train_gbm
from .linear import LogisticConfig, train_linear, train_logistic
from .mlp import MlpConfig, train_mlp
from .tree import Tree, grow_tree

__all__ = [
    "CLASSIFICATION",
    "REGRESSION",
    "ForestConfig",
    "GbmConfig",
    "LogisticConfig",
    "MlpConfig",
    "TrainedModel",
    "Tree",
    "grow_tree",
    "model_from_json",
    "model_to_json",
    "predict",
    "predict_proba",
    "train_forest",
    "train_gbm",
    "train_linear",
    "train_logistic",
    "train_mlp",
]
