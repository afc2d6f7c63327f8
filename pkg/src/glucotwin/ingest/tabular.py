"""Tabular benchmark loading and risk-label derivation.

The canonical benchmark is the 442-row open diabetes regression table
(10 standardized covariates, continuous disease-progression target),
shipped with the package so loads work offline and bit-identically.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ..errors import FormatError, RecordError

BENCHMARK_FEATURE_COUNT = 10
BENCHMARK_ROW_COUNT = 442


@dataclass
class TabularDataset:
    feature_names: list[str]
    rows: np.ndarray          # (n, d) float64
    target: np.ndarray        # (n,) float64
    risk_label: np.ndarray | None = None   # (n,) int 0/1 when derived

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        self.target = np.asarray(self.target, dtype=float)
        if self.rows.ndim != 2:
            raise ValueError("rows must be a 2-D matrix")
        if len(self.target) != self.rows.shape[0]:
            raise ValueError("target length must equal row count")
        if self.rows.shape[1] != len(self.feature_names):
            raise ValueError("feature_names length must equal column count")

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def subset(self, idx) -> "TabularDataset":
        lab = None if self.risk_label is None else self.risk_label[idx]
        return TabularDataset(self.feature_names, self.rows[idx], self.target[idx], lab)


def load_tabular(data: bytes | str, expect_features: int | None = None) -> TabularDataset:
    """Parse a feature CSV whose header names the covariates plus ``target``."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.reader(io.StringIO(data))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise FormatError("empty document, expected a feature header") from None
    if "target" not in header:
        raise FormatError("header must include a 'target' column")
    target_col = header.index("target")
    feature_names = [h for i, h in enumerate(header) if i != target_col]
    if not feature_names:
        raise FormatError("no feature columns found")
    if expect_features is not None and len(feature_names) != expect_features:
        raise FormatError(
            f"expected {expect_features} feature columns, got {len(feature_names)}"
        )
    rows, targets = [], []
    for i, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise RecordError(f"expected {len(header)} fields, got {len(row)}", row=i)
        try:
            vals = [float(v) for v in row]
        except ValueError:
            raise RecordError("non-numeric cell", row=i) from None
        targets.append(vals.pop(target_col))
        rows.append(vals)
    return TabularDataset(feature_names, np.array(rows, dtype=float).reshape(len(rows), len(feature_names)),
                          np.array(targets, dtype=float))


def load_benchmark() -> TabularDataset:
    """Load the packaged 442-row benchmark table."""
    text = resources.files("glucotwin.data").joinpath("diabetes_benchmark.csv").read_text()
    ds = load_tabular(text, expect_features=BENCHMARK_FEATURE_COUNT)
    if ds.n_rows != BENCHMARK_ROW_COUNT:
        raise FormatError(f"benchmark table should have {BENCHMARK_ROW_COUNT} rows, got {ds.n_rows}")
    return ds


def tabular_to_csv(ds: TabularDataset) -> str:
    """Render a dataset back to the feature-CSV wire format (reparseable)."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(list(ds.feature_names) + ["target"])
    for row, t in zip(ds.rows, ds.target):
        w.writerow([repr(float(v)) for v in row] + [repr(float(t))])
    return buf.getvalue()


def median_split_threshold(target: np.ndarray) -> float:
    """Median with the even-length convention: mean of the two central order stats."""
    s = np.sort(np.asarray(target, dtype=float))
    n = len(s)
    if n == 0:
        raise ValueError("empty target")
    mid = n // 2
    if n % 2 == 1:
        return float(s[mid])
    return float((s[mid - 1] + s[mid]) / 2.0)


def derive_risk_labels(ds: TabularDataset) -> TabularDataset:
    """Label rows 1 iff target exceeds the median (ties at the median get 0)."""
    thr = median_split_threshold(ds.target)
    labels = (ds.target > thr).astype(int)
    return TabularDataset(ds.feature_names, ds.rows, ds.target, labels)
