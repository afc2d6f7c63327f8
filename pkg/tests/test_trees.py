"""Tree, boosting, and forest behavior against independent oracles."""
import numpy as np
import pytest

from glucotwin.models import (
    ForestConfig,
    GbmConfig,
    grow_tree,
    model_from_json,
    model_to_json,
    predict,
    predict_proba,
    train_forest,
    train_gbm,
)
from glucotwin.errors import TrainingError


# -- independent reference tree (naive, recursive) --------------------------

def _ref_best_split(X, y, min_leaf):
    n, d = X.shape
    parent = y.sum() ** 2 / n
    best = (0.0, None, None)
    for f in range(d):
        order = np.argsort(X[:, f], kind="mergesort")
        xs, ys = X[order, f], y[order]
        left = 0.0
        for i in range(n - 1):
            left += ys[i]
            nl = i + 1
            if nl < min_leaf or n - nl < min_leaf or xs[i] >= xs[i + 1]:
                continue
            gain = left ** 2 / nl + (y.sum() - left) ** 2 / (n - nl) - parent
            if gain > best[0]:
                thr = (xs[i] + xs[i + 1]) / 2
                if thr >= xs[i + 1]:
                    thr = xs[i]
                best = (gain, f, thr)
    return best


def _ref_tree_predict(X, y, queries, max_depth, min_leaf):
    def rec(Xn, yn, q, depth):
        if (max_depth is not None and depth >= max_depth) or len(yn) < 2 * min_leaf \
                or np.var(yn) * len(yn) <= 1e-12:
            return np.full(len(q), yn.mean())
        gain, f, thr = _ref_best_split(Xn, yn, min_leaf)
        if f is None:
            return np.full(len(q), yn.mean())
        mask = Xn[:, f] <= thr
        qmask = q[:, f] <= thr
        out = np.empty(len(q))
        out[qmask] = rec(Xn[mask], yn[mask], q[qmask], depth + 1)
        out[~qmask] = rec(Xn[~mask], yn[~mask], q[~qmask], depth + 1)
        return out

    return rec(X, y, queries, 0)


@pytest.mark.parametrize("max_depth,min_leaf", [(1, 1), (2, 1), (3, 2)])
def test_tree_matches_reference(max_depth, min_leaf):
    rng = np.random.default_rng(9)
    for trial in range(8):
        X = rng.normal(size=(40, 3))
        y = X[:, 0] * 2 + np.sin(X[:, 1]) + rng.normal(0, 0.3, 40)
        t = grow_tree(X, y, max_depth=max_depth, min_samples_leaf=min_leaf)
        q = rng.normal(size=(25, 3))
        expect = _ref_tree_predict(X, y, q, max_depth, min_leaf)
        # same structure exactly; leaf means may differ in the last bits
        # because the oracle averages with numpy's pairwise summation
        assert np.allclose(t.predict(q), expect, rtol=0, atol=1e-9)


def test_unlimited_depth_matches_reference_exactly():
    # dyadic values make every sum exact, so gains (and therefore tie-breaks
    # and leaf means) are bit-identical between grower and oracle
    rng = np.random.default_rng(21)
    for trial in range(8):
        X = rng.integers(-16, 16, size=(40, 3)).astype(float) / 4.0
        y = rng.integers(-32, 32, size=40).astype(float) / 8.0
        t = grow_tree(X, y, max_depth=None, min_samples_leaf=1)
        q = rng.integers(-16, 16, size=(25, 3)).astype(float) / 4.0
        expect = _ref_tree_predict(X, y, q, None, 1)
        assert np.array_equal(t.predict(q), expect)


def test_tree_duplicate_feature_tiebreak_lowest_index():
    # identical columns give identical gains; the split must pick column 0
    X = np.column_stack([np.arange(8.0), np.arange(8.0)])
    y = np.array([0.0, 0, 0, 0, 5, 5, 5, 5])
    t = grow_tree(X, y, max_depth=1)
    assert t.feature[0] == 0


class TestGbm:
    def test_single_stage_equals_mean_plus_tree(self):
        # hand oracle: X splits once, leaves hold residual means
        X = np.array([[0.0], [0.0], [1.0], [1.0]])
        y = np.array([1.0, 2.0, 3.0, 4.0])
        model = train_gbm(X, y, GbmConfig(n_estimators=1, learning_rate=1.0))
        assert np.array_equal(predict(model, X), [1.5, 1.5, 3.5, 3.5])

    def test_constant_target(self):
        X = np.arange(12.0).reshape(6, 2)
        model = train_gbm(X, np.full(6, 3.25), GbmConfig(n_estimators=7))
        assert np.all(predict(model, X) == 3.25)

    def test_staged_accumulator_and_monotone_loss(self, benchmark_ds):
        X, y = benchmark_ds.rows[:120], benchmark_ds.target[:120]
        cfg = GbmConfig(n_estimators=30)
        model = train_gbm(X, y, cfg)
        acc = np.full(len(y), model.params["f0"])
        prev_rmse = np.inf
        for tree in model.params["trees"]:
            acc = acc + cfg.learning_rate * tree.predict(X)
            stage_rmse = float(np.sqrt(np.mean((y - acc) ** 2)))
            assert stage_rmse <= prev_rmse + 1e-12
            prev_rmse = stage_rmse
        assert np.array_equal(acc, predict(model, X))

    def test_too_few_samples(self):
        with pytest.raises(TrainingError):
            train_gbm(np.zeros((3, 1)), np.zeros(3), GbmConfig(min_samples_leaf=2))

    def test_serialization_roundtrip(self, benchmark_ds):
        X, y = benchmark_ds.rows[:60], benchmark_ds.target[:60]
        model = train_gbm(X, y, GbmConfig(n_estimators=5))
        again = model_from_json(model_to_json(model))
        assert np.array_equal(predict(model, X), predict(again, X))
        assert again.fingerprint == model.fingerprint


class TestForest:
    def test_degenerate_equals_single_tree(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(50, 4))
        y = X @ np.array([1.0, -2.0, 0.5, 0.0]) + rng.normal(0, 0.2, 50)
        model = train_forest(X, y, ForestConfig(n_trees=1, bootstrap=False,
                                                features_per_split=4))
        q = rng.normal(size=(20, 4))
        expect = _ref_tree_predict(X, y, q, None, 1)
        assert np.allclose(predict(model, q), expect, rtol=0, atol=1e-9)

    def test_constant_target(self):
        X = np.arange(20.0).reshape(10, 2)
        model = train_forest(X, np.full(10, 2.5), ForestConfig(n_trees=5, seed=1))
        assert np.all(predict(model, X) == 2.5)

    def test_variance_reduction_across_seeds(self):
        rng = np.random.default_rng(123)
        X = rng.normal(size=(200, 5))
        y = X.sum(axis=1) + rng.normal(0, 1.0, 200)
        Xtr, ytr, Xte, yte = X[:140], y[:140], X[140:], y[140:]
        wins = 0
        for seed in range(10):
            big = train_forest(Xtr, ytr, ForestConfig(n_trees=100, seed=seed))
            one = train_forest(Xtr, ytr, ForestConfig(n_trees=1, seed=seed))
            e_big = np.sqrt(np.mean((yte - predict(big, Xte)) ** 2))
            e_one = np.sqrt(np.mean((yte - predict(one, Xte)) ** 2))
            wins += e_big < e_one
        assert wins >= 9

    def test_probability_is_vote_fraction(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(80, 3))
        y = (X[:, 0] + 0.3 * rng.normal(size=80) > 0).astype(float)
        model = train_forest(X, y, ForestConfig(n_trees=40, seed=2), task="classification")
        q = rng.normal(size=(10, 3))
        proba = predict_proba(model, q)
        per_tree = np.stack([t.predict(q) for t in model.params["trees"]])
        assert np.allclose(proba, per_tree.mean(axis=0))
        assert np.all((proba >= 0) & (proba <= 1))

    def test_determinism_and_roundtrip(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(40, 3))
        y = rng.normal(size=40)
        a = train_forest(X, y, ForestConfig(n_trees=10, seed=5))
        b = train_forest(X, y, ForestConfig(n_trees=10, seed=5))
        assert a.fingerprint == b.fingerprint
        assert np.array_equal(predict(a, X), predict(b, X))
        again = model_from_json(model_to_json(a))
        assert np.array_equal(predict(a, X), predict(again, X))

    def test_proba_requires_classifier(self):
        X = np.arange(20.0).reshape(10, 2)
        model = train_forest(X, np.arange(10.0), ForestConfig(n_trees=2))
        with pytest.raises(ValueError):
            predict_proba(model, X)
