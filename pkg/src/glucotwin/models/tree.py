"""Regression tree grown by exact greedy variance reduction.

Splits scan every candidate midpoint threshold of every considered feature
and keep the first strictly-best gain, which realizes the deterministic
tie-break (lowest feature index, then lowest threshold). The grower is
compiled with numba because the benchmark reproduction builds thousands of
trees inside its runtime budget.

Feature subsampling (for forests) uses an explicit splitmix64 stream so the
same node seed yields the same subsets on any platform.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True)
def _mix64(state):
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & _MASK
    z = state
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK
    return state, z ^ (z >> np.uint64(31))


@njit(cache=True)
def _grow(X, y, max_depth, min_leaf, k_features, seed):
    n, d = X.shape
    cap = 2 * n + 1
    feat = np.full(cap, -1, np.int64)
    thr = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap, np.float64)

    idx = np.arange(n)
    scratch = np.empty(n, np.int64)
    st_lo = np.empty(cap, np.int64)
    st_hi = np.empty(cap, np.int64)
    st_dep = np.empty(cap, np.int64)
    st_node = np.empty(cap, np.int64)
    pool = np.arange(d)

    n_nodes = 1
    top = 0
    st_lo[0], st_hi[0], st_dep[0], st_node[0] = 0, n, 0, 0
    state = seed

    while top >= 0:
        lo, hi, dep, node = st_lo[top], st_hi[top], st_dep[top], st_node[top]
        top -= 1
        m = hi - lo
        s = 0.0
        ss = 0.0
        for i in range(lo, hi):
            v = y[idx[i]]
            s += v
            ss += v * v
        value[node] = s / m
        sse = ss - s * s / m
        if (max_depth >= 0 and dep >= max_depth) or m < 2 * min_leaf or sse <= 1e-12:
            continue

        if k_features < d:
            for i in range(k_features):
                state, r = _mix64(state)
                j = i + np.int64(r % np.uint64(d - i))
                pool[i], pool[j] = pool[j], pool[i]
            chosen = np.sort(pool[:k_features])
        else:
            chosen = pool

        best_gain = 0.0
        best_f = -1
        best_thr = 0.0
        for fi in range(len(chosen)):
            f = chosen[fi]
            vals = np.empty(m, np.float64)
            for i in range(m):
                vals[i] = X[idx[lo + i], f]
            order = np.argsort(vals, kind="mergesort")
            sl = 0.0
            for i in range(m - 1):
                sl += y[idx[lo + order[i]]]
                nl = i + 1
                if nl < min_leaf or m - nl < min_leaf:
                    continue
                va = vals[order[i]]
                vb = vals[order[i + 1]]
                if va >= vb:
                    continue
                sr = s - sl
                gain = sl * sl / nl + sr * sr / (m - nl) - s * s / m
                if gain > best_gain:
                    best_gain = gain
                    best_f = f
                    t = 0.5 * (va + vb)
                    if t >= vb:  # float midpoint collapsed onto the upper value
                        t = va
                    best_thr = t
        if best_f < 0:
            continue

        nl = 0
        for i in range(lo, hi):
            if X[idx[i], best_f] <= best_thr:
                scratch[lo + nl] = idx[i]
                nl += 1
        nr = nl
        for i in range(lo, hi):
            if X[idx[i], best_f] > best_thr:
                scratch[lo + nr] = idx[i]
                nr += 1
        for i in range(lo, hi):
            idx[i] = scratch[i]

        feat[node] = best_f
        thr[node] = best_thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        top += 1
        st_lo[top], st_hi[top], st_dep[top], st_node[top] = lo, lo + nl, dep + 1, left[node]
        top += 1
        st_lo[top], st_hi[top], st_dep[top], st_node[top] = lo + nl, hi, dep + 1, right[node]
        n_nodes += 2

    return feat[:n_nodes], thr[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


@njit(cache=True)
def _predict(feat, thr, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        node = 0
        while feat[node] >= 0:
            if X[i, feat[node]] <= thr[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _predict(self.feature, self.threshold, self.left, self.right, self.value, X)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def to_dict(self) -> dict:
        return {
            "feature": [int(v) for v in self.feature],
            "threshold": [float(v) for v in self.threshold],
            "left": [int(v) for v in self.left],
            "right": [int(v) for v in self.right],
            "value": [float(v) for v in self.value],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64),
        )


def grow_tree(X: np.ndarray, y: np.ndarray, max_depth: int | None,
              min_samples_leaf: int = 1, features_per_split: int | None = None,
              node_seed: int = 0) -> Tree:
    """Grow one tree; ``max_depth=None`` means unlimited."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if len(X) == 0:
        raise ValueError("cannot grow a tree on zero samples")
    d = X.shape[1]
    k = d if features_per_split is None else max(1, min(features_per_split, d))
    depth = -1 if max_depth is None else int(max_depth)
    parts = _grow(X, y, depth, int(min_samples_leaf), k, np.uint64(node_seed))
    return Tree(*parts)
