"""Splits, metrics, and the multi-seed benchmark protocol.

The benchmark repeats a seeded 80:20 split over a list of seeds, trains
every configured model per seed, and reports regression metrics on the
continuous target plus classification metrics on the median-derived risk
label. Classifier variants reuse the regression hyperparameters (same
config objects). Reported table values come from one specific split RNG,
so reproduction is defined over the multi-seed mean rather than any
single seed; the default seed list starts at 42, the customary fixed
seed.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingError
from .ingest.tabular import TabularDataset, derive_risk_labels
from .models import (
    CLASSIFICATION,
    REGRESSION,
    ForestConfig,
    GbmConfig,
    LogisticConfig,
    MlpConfig,
    predict,
    predict_proba,
    train_forest,
    train_gbm,
    train_linear,
    train_logistic,
    train_mlp,
)

DEFAULT_BASE_SEED = 42
DEFAULT_N_SEEDS = 20
REPORT_COLUMNS = ["model", "seed", "mae", "rmse", "r2", "accuracy", "auc"]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = DEFAULT_BASE_SEED

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must be in (0, 1)")


def split(ds: TabularDataset, spec: SplitSpec) -> tuple[TabularDataset, TabularDataset]:
    """Seeded Fisher-Yates permutation; first floor(fraction*n) rows train."""
    n = ds.n_rows
    if n < 5:
        raise ValueError("dataset too small to split")
    perm = np.random.default_rng(spec.seed).permutation(n)
    n_train = int(np.floor(spec.train_fraction * n))
    return ds.subset(perm[:n_train]), ds.subset(perm[n_train:])


def mae(y: np.ndarray, y_hat: np.ndarray) -> float:
    y, y_hat = _paired(y, y_hat)
    return float(np.mean(np.abs(y - y_hat)))


def rmse(y: np.ndarray, y_hat: np.ndarray) -> float:
    y, y_hat = _paired(y, y_hat)
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


def r2(y: np.ndarray, y_hat: np.ndarray) -> float:
    y, y_hat = _paired(y, y_hat)
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0:
        raise ValueError("r2 is undefined for a constant target")
    sse = float(np.sum((y - y_hat) ** 2))
    return 1.0 - sse / sst


def accuracy(labels: np.ndarray, predicted: np.ndarray) -> float:
    labels, predicted = _paired(labels, predicted)
    return float(np.mean(labels == predicted))


def compute_auc(labels: np.ndarray, scores: np.ndarray) -> float:
    """Rank-statistic AUC with half credit for ties.

    Equals the brute-force over positive/negative pairs exactly: midranks
    are dyadic rationals, so no floating error enters before the final
    division.
    """
    labels, scores = _paired(labels, scores)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    ranks = np.empty(len(s), dtype=float)
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        ranks[i:j + 1] = (i + j) / 2.0 + 1.0   # midrank, 1-based
        i = j + 1
    rank_sum_pos = float(np.sum(ranks[labels[order] == 1]))
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def _paired(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty input")
    return a, b


@dataclass
class ReportRow:
    model: str
    seed: int | str
    mae: float | None = None
    rmse: float | None = None
    r2: float | None = None
    accuracy: float | None = None
    auc: float | None = None

    def as_list(self):
        return [self.model, self.seed, self.mae, self.rmse, self.r2, self.accuracy, self.auc]


@dataclass
class EvalReport:
    rows: list[ReportRow]
    seeds: list[int]
    train_fraction: float
    model_order: list[str] = field(default_factory=list)

    def mean_rows(self) -> list[ReportRow]:
        return [r for r in self.rows if r.seed == "mean"]

    def mean_for(self, model: str) -> ReportRow:
        for r in self.rows:
            if r.model == model and r.seed == "mean":
                return r
        raise KeyError(model)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(REPORT_COLUMNS)
        for r in self.rows:
            w.writerow(["" if v is None else v for v in r.as_list()])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "seeds": self.seeds,
            "train_fraction": self.train_fraction,
            "model_order": self.model_order,
            "columns": REPORT_COLUMNS,
            "rows": [r.as_list() for r in self.rows],
        }, indent=2)

    @classmethod
    def from_json(cls, text: str | bytes) -> "EvalReport":
        doc = json.loads(text)
        rows = [ReportRow(*vals) for vals in doc["rows"]]
        return cls(rows=rows, seeds=doc["seeds"], train_fraction=doc["train_fraction"],
                   model_order=doc.get("model_order", []))


def default_model_configs() -> list[tuple[str, object]]:
    """The benchmark's model suite: the four supervised kinds, with logistic
    regression as the linear model's classification twin."""
    return [
        ("linear", None),
        ("logistic", LogisticConfig()),
        ("forest", ForestConfig()),
        ("gbm", GbmConfig()),
        ("mlp", MlpConfig()),
    ]


def default_seeds(n: int = DEFAULT_N_SEEDS, base: int = DEFAULT_BASE_SEED) -> list[int]:
    return list(range(base, base + n))


def run_benchmark(ds: TabularDataset, model_configs=None, seeds=None) -> EvalReport:
    """Per-seed split/train/evaluate for every configured model, plus mean rows."""
    if model_configs is None:
        model_configs = default_model_configs()
    if seeds is None:
        seeds = default_seeds()
    if not seeds:
        raise ValueError("need at least one seed")
    if ds.risk_label is None:
        ds = derive_risk_labels(ds)

    order = [kind for kind, _ in model_configs]
    rows: list[ReportRow] = []
    by_model: dict[str, list[ReportRow]] = {kind: [] for kind in order}
    for seed in seeds:
        train, test = split(ds, SplitSpec(seed=seed))
        for kind, cfg in model_configs:
            row = ReportRow(model=kind, seed=seed)
            if kind != "logistic":
                reg = _train_regressor(kind, cfg, train, seed)
                pred = predict(reg, test.rows)
                row.mae = mae(test.target, pred)
                row.rmse = rmse(test.target, pred)
                row.r2 = r2(test.target, pred)
            if kind != "linear":
                clf = _train_classifier(kind, cfg, train, seed)
                proba = predict_proba(clf, test.rows)
                row.accuracy = accuracy(test.risk_label, (proba > 0.5).astype(float))
                row.auc = compute_auc(test.risk_label, proba)
            rows.append(row)
            by_model[kind].append(row)

    for kind in order:
        group = by_model[kind]
        mean_row = ReportRow(model=kind, seed="mean")
        for attr in ("mae", "rmse", "r2", "accuracy", "auc"):
            vals = [getattr(r, attr) for r in group if getattr(r, attr) is not None]
            if vals:
                setattr(mean_row, attr, float(np.mean(vals)))
        rows.append(mean_row)
    return EvalReport(rows=rows, seeds=list(seeds), train_fraction=0.8, model_order=order)


def _train_regressor(kind, cfg, train: TabularDataset, seed: int):
    if kind == "linear":
        return train_linear(train.rows, train.target)
    if kind == "forest":
        cfg = cfg or ForestConfig()
        return train_forest(train.rows, train.target,
                            ForestConfig(**{**cfg.__dict__, "seed": seed}), task=REGRESSION)
    if kind == "gbm":
        return train_gbm(train.rows, train.target, cfg or GbmConfig(), task=REGRESSION)
    if kind == "mlp":
        cfg = cfg or MlpConfig()
        return train_mlp(train.rows, train.target,
                         MlpConfig(**{**cfg.__dict__, "seed": seed}), task=REGRESSION)
    raise TrainingError(f"unknown regression model kind {kind!r}")


def _train_classifier(kind, cfg, train: TabularDataset, seed: int):
    y = train.risk_label.astype(float)
    if kind == "logistic":
        return train_logistic(train.rows, y, cfg or LogisticConfig())
    if kind == "forest":
        cfg = cfg or ForestConfig()
        return train_forest(train.rows, y,
                            ForestConfig(**{**cfg.__dict__, "seed": seed}), task=CLASSIFICATION)
    if kind == "gbm":
        return train_gbm(train.rows, y, cfg or GbmConfig(), task=CLASSIFICATION)
    if kind == "mlp":
        cfg = cfg or MlpConfig()
        return train_mlp(train.rows, y,
                         MlpConfig(**{**cfg.__dict__, "seed": seed}), task=CLASSIFICATION)
    raise TrainingError(f"unknown classifier kind {kind!r}")
