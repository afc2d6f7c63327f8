import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glucotwin.evaluation import (
    EvalReport,
    SplitSpec,
    accuracy,
    compute_auc,
    default_seeds,
    mae,
    r2,
    rmse,
    run_benchmark,
    split,
)
from glucotwin.models import ForestConfig, GbmConfig, LogisticConfig, MlpConfig


def brute_force_auc(labels, scores):
    labels = np.asarray(labels)
    scores = np.asarray(scores)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = float(np.sum(pos[:, None] > neg[None, :]))
    ties = float(np.sum(pos[:, None] == neg[None, :]))
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


class TestSplit:
    def test_counts_and_disjoint(self, benchmark_ds):
        sub = benchmark_ds.subset(np.arange(10))
        train, test = split(sub, SplitSpec(seed=0))
        assert train.n_rows == 8 and test.n_rows == 2
        assert not set(map(tuple, train.rows)) & set(map(tuple, test.rows))

    def test_same_seed_same_partition(self, benchmark_ds):
        a = split(benchmark_ds, SplitSpec(seed=5))
        b = split(benchmark_ds, SplitSpec(seed=5))
        assert np.array_equal(a[0].rows, b[0].rows)
        assert np.array_equal(a[1].rows, b[1].rows)

    def test_exhaustive_over_trials(self, benchmark_ds):
        n = benchmark_ds.n_rows
        full = np.sort(benchmark_ds.target)
        for seed in range(100):
            train, test = split(benchmark_ds, SplitSpec(seed=seed))
            union = np.sort(np.concatenate([train.target, test.target]))
            assert np.array_equal(union, full)

    def test_too_small(self, benchmark_ds):
        with pytest.raises(ValueError):
            split(benchmark_ds.subset(np.arange(3)), SplitSpec())


class TestMetrics:
    def test_perfect_predictions(self):
        y = np.array([1.0, 2.0, 3.0])
        assert mae(y, y) == 0
        assert rmse(y, y) == 0
        assert r2(y, y) == 1

    def test_hand_computed(self):
        y = np.array([1.0, 2.0, 4.0])
        y_hat = np.array([1.0, 2.0, 3.0])
        assert mae(y, y_hat) == pytest.approx(1 / 3)
        assert rmse(y, y_hat) == pytest.approx(np.sqrt(1 / 3))

    def test_mean_predictor_r2_zero(self):
        y = np.array([1.0, 2.0, 4.0])
        assert r2(y, np.full(3, y.mean())) == pytest.approx(0.0)

    def test_constant_target_r2_undefined(self):
        with pytest.raises(ValueError):
            r2(np.ones(4), np.zeros(4))

    def test_r2_affine_shift_invariant(self):
        rng = np.random.default_rng(1)
        y, y_hat = rng.normal(size=30), rng.normal(size=30)
        assert r2(y + 5.5, y_hat + 5.5) == pytest.approx(r2(y, y_hat), abs=1e-12)

    @settings(max_examples=80, deadline=None)
    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
                    min_size=1, max_size=50),
           st.data())
    def test_rmse_dominates_mae(self, ys, data):
        y_hat = data.draw(st.lists(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
                                   min_size=len(ys), max_size=len(ys)))
        assert rmse(np.array(ys), np.array(y_hat)) >= mae(np.array(ys), np.array(y_hat)) - 1e-12


class TestAuc:
    def test_perfectly_separated(self):
        assert compute_auc(np.array([0, 0, 1, 1]), np.array([0.1, 0.2, 0.8, 0.9])) == 1.0

    def test_all_ties(self):
        assert compute_auc(np.array([0, 1, 0, 1]), np.zeros(4)) == 0.5

    def test_single_class_errors(self):
        with pytest.raises(ValueError):
            compute_auc(np.ones(4), np.arange(4.0))

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(7)
        labels = rng.integers(0, 2, 30).astype(float)
        labels[:2] = [0, 1]
        scores = np.round(rng.normal(size=30), 1)  # duplicates force tie handling
        assert abs(compute_auc(labels, scores) - brute_force_auc(labels, scores)) <= 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=2, max_value=40), st.integers(min_value=0, max_value=10_000))
    def test_oracle_equality_fuzzed(self, n, seed):
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, 2, n).astype(float)
        labels[0], labels[-1] = 0, 1
        scores = np.round(rng.normal(size=n), 1)
        assert abs(compute_auc(labels, scores) - brute_force_auc(labels, scores)) <= 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_monotone_transform_invariance(self, seed):
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, 2, 25).astype(float)
        labels[0], labels[-1] = 0, 1
        scores = rng.normal(size=25)
        base = compute_auc(labels, scores)
        assert compute_auc(labels, np.exp(scores)) == pytest.approx(base, abs=1e-12)
        assert compute_auc(labels, 3.0 * scores + 11.0) == pytest.approx(base, abs=1e-12)


TINY_CONFIGS = [
    ("linear", None),
    ("logistic", LogisticConfig(max_iter=500)),
    ("forest", ForestConfig(n_trees=8)),
    ("gbm", GbmConfig(n_estimators=10)),
    ("mlp", MlpConfig(epochs=15)),
]


class TestRunBenchmark:
    def test_report_structure_and_determinism(self, benchmark_ds):
        seeds = [3, 4]
        a = run_benchmark(benchmark_ds, TINY_CONFIGS, seeds)
        b = run_benchmark(benchmark_ds, TINY_CONFIGS, seeds)
        assert a.to_csv() == b.to_csv()
        assert a.model_order == [k for k, _ in TINY_CONFIGS]
        # per-seed rows in config order, then one mean row per model
        kinds = [r.model for r in a.rows if r.seed == seeds[0]]
        assert kinds == a.model_order
        assert len(a.mean_rows()) == len(TINY_CONFIGS)
        lin = a.mean_for("linear")
        assert lin.rmse is not None and lin.auc is None
        logi = a.mean_for("logistic")
        assert logi.auc is not None and logi.rmse is None
        assert a.mean_for("gbm").rmse >= a.mean_for("gbm").mae

    def test_empty_seeds_rejected(self, benchmark_ds):
        with pytest.raises(ValueError):
            run_benchmark(benchmark_ds, TINY_CONFIGS, [])

    def test_majority_predictor_accuracy_band(self, benchmark_ds):
        # class balance makes the train-majority predictor a coin flip
        accs = []
        for seed in default_seeds(20):
            train, test = split(benchmark_ds, SplitSpec(seed=seed))
            majority = float(np.mean(train.risk_label) > 0.5)
            accs.append(accuracy(test.risk_label, np.full(test.n_rows, majority)))
        assert 0.45 <= float(np.mean(accs)) <= 0.55

    def test_report_json_roundtrip(self, benchmark_ds):
        report = run_benchmark(benchmark_ds, [("linear", None)], [1, 2])
        again = EvalReport.from_json(report.to_json())
        assert again.to_csv() == report.to_csv()
        assert again.seeds == report.seeds
