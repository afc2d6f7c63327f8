"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one PASS line on success (run with ``pytest -s`` to see
them); any tolerance miss fails the corresponding test. The expensive
shared computations (the 20-seed benchmark, the outcome-table calibration)
run once per session.
"""
import json
import time
from datetime import timedelta

import numpy as np
import pytest

from glucotwin.augment import AugmentConfig, augment, sequences_to_csv
from glucotwin.counterfactual import (
    CalibrationTarget,
    InterventionScenario,
    ResponseParams,
    UtilityWeights,
    calibrate,
    compute_outcome,
    rank_interventions,
    simulate_scenario,
    trajectories_to_csv,
)
from glucotwin.evaluation import SplitSpec, compute_auc, default_seeds, run_benchmark, split
from glucotwin.ingest import (
    ParseStats,
    export_cgm_csv,
    generate_corpus,
    parse_cgm_csv,
    parse_cgm_xml,
    summarize,
)
from glucotwin.models import (
    ForestConfig,
    GbmConfig,
    MlpConfig,
    grow_tree,
    model_from_json,
    model_to_json,
    predict,
    train_forest,
    train_gbm,
    train_linear,
    train_mlp,
)
from glucotwin.models.mlp import init_params, loss_and_grads
from glucotwin.twin import Action

SEEDS = default_seeds(20)  # 42..61, the benchmark's default protocol


def _ok(line):
    print(f"ACCEPTANCE PASS: {line}")


@pytest.fixture(scope="session")
def benchmark_report(benchmark_ds):
    t0 = time.perf_counter()
    report = run_benchmark(benchmark_ds, seeds=SEEDS)
    elapsed = time.perf_counter() - t0
    return report, elapsed


@pytest.fixture(scope="session")
def table_calibration():
    targets = [
        CalibrationTarget(InterventionScenario("baseline", Action(carbs_g=60)), 179, 58),
        CalibrationTarget(InterventionScenario("reduced-carb", Action(carbs_g=30)), 153, 72),
        CalibrationTarget(
            InterventionScenario("baseline-plus-walking",
                                 Action(carbs_g=60, activity_min=15)), 163, 68),
    ]
    t0 = time.perf_counter()
    result = calibrate(targets)
    return targets, result, time.perf_counter() - t0


class TestBenchmarkRegression:
    """20-seed regression reproduction with runtime bound."""

    def test_linear_rmse_band(self, benchmark_report):
        report, _ = benchmark_report
        value = report.mean_for("linear").rmse
        assert 50.8 <= value <= 56.9, value
        _ok(f"linear mean RMSE {value:.2f} in [50.8, 56.9]")

    def test_gbm_rmse_band(self, benchmark_report):
        report, _ = benchmark_report
        value = report.mean_for("gbm").rmse
        assert 49.0 <= value <= 59.0, value
        _ok(f"gradient-boosting mean RMSE {value:.2f} in [49, 59]")

    def test_gbm_r2_band(self, benchmark_report):
        report, _ = benchmark_report
        value = report.mean_for("gbm").r2
        assert 0.35 <= value <= 0.55, value
        _ok(f"gradient-boosting mean R2 {value:.3f} in [0.35, 0.55]")

    def test_runtime_bound(self, benchmark_report):
        _, elapsed = benchmark_report
        assert elapsed < 60.0, elapsed
        _ok(f"benchmark runtime {elapsed:.1f}s < 60s")

    def test_mlp_substitute_checks(self, benchmark_report):
        # the published MLP figure is declared non-reproducible; substitute:
        # exact gradients against central differences, and a finite test R2
        rng = np.random.default_rng(11)
        params = init_params(3, 2, rng)
        X = rng.normal(size=(8, 3)) + 0.5
        y = rng.normal(size=8)
        names = ("w1", "b1", "w2", "b2")
        shapes = {"w1": (3, 2), "b1": (2,), "w2": (2,), "b2": ()}
        theta = np.concatenate([np.ravel(params[k]) for k in names])
        _, grads = loss_and_grads(params, X, y)
        analytic = np.concatenate([np.ravel(np.asarray(grads[k], dtype=float)) for k in names])
        h = 1e-5
        numeric = np.empty_like(theta)
        for i in range(len(theta)):
            up, down = theta.copy(), theta.copy()
            up[i] += h
            down[i] -= h

            def unflat(vec):
                out, pos = {}, 0
                for k in names:
                    size = int(np.prod(shapes[k])) if shapes[k] else 1
                    chunk = vec[pos:pos + size]
                    out[k] = chunk.reshape(shapes[k]) if shapes[k] else float(chunk[0])
                    pos += size
                return out

            numeric[i] = (loss_and_grads(unflat(up), X, y)[0]
                          - loss_and_grads(unflat(down), X, y)[0]) / (2 * h)
        rel = np.max(np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-8))
        assert rel < 1e-4, rel

        report, _ = benchmark_report
        r2_val = report.mean_for("mlp").r2
        assert np.isfinite(r2_val)
        _ok(f"MLP gradient check rel err {rel:.2e} < 1e-4; mean test R2 {r2_val:.3f} (finite)")


class TestBenchmarkClassification:
    """20-seed derived-classification reproduction."""

    def test_forest_auc_band(self, benchmark_report):
        report, _ = benchmark_report
        value = report.mean_for("forest").auc
        assert 0.78 <= value <= 0.88, value
        _ok(f"random-forest mean AUC {value:.3f} in [0.78, 0.88]")

    def test_logistic_auc_band(self, benchmark_report):
        report, _ = benchmark_report
        value = report.mean_for("logistic").auc
        assert 0.77 <= value <= 0.87, value
        _ok(f"logistic mean AUC {value:.3f} in [0.77, 0.87]")

    def test_auc_equals_pairwise_oracle_on_fuzzed_instances(self):
        rng = np.random.default_rng(1234)
        for _ in range(100):
            n = int(rng.integers(2, 60))
            labels = rng.integers(0, 2, n).astype(float)
            labels[0], labels[-1] = 0, 1
            scores = np.round(rng.normal(size=n), 1)
            pos = scores[labels == 1]
            neg = scores[labels == 0]
            brute = (float(np.sum(pos[:, None] > neg[None, :]))
                     + 0.5 * float(np.sum(pos[:, None] == neg[None, :]))) / (len(pos) * len(neg))
            assert abs(compute_auc(labels, scores) - brute) <= 1e-12
        _ok("rank AUC equals pairwise oracle to 1e-12 on 100 fuzzed instances")


class TestOutcomeTableCalibration:
    """Counterfactual calibration against the published outcome triple."""

    def test_peaks_and_tir(self, table_calibration):
        _, result, _ = table_calibration
        expected = {"baseline": (179, 58), "reduced-carb": (153, 72),
                    "baseline-plus-walking": (163, 68)}
        for a in result.achieved:
            peak_t, tir_t = expected[a["label"]]
            assert abs(a["peak_mg_dl"] - peak_t) <= 2.0, a
            assert abs(a["tir_pct"] - tir_t) <= 5.0, a
        _ok("calibrated peaks within +/-2 mg/dL and TIR within +/-5pp of published values")

    def test_ranking_exact(self, table_calibration):
        targets, result, _ = table_calibration
        outs = [compute_outcome(simulate_scenario(result.params, t.scenario),
                                result.params, label=t.scenario.label) for t in targets]
        order = [o.label for o in rank_interventions(outs)]
        assert order == ["reduced-carb", "baseline-plus-walking", "baseline"], order
        _ok(f"intervention ranking {order}")

    def test_runtime_bound(self, table_calibration):
        _, _, elapsed = table_calibration
        assert elapsed < 10.0, elapsed
        _ok(f"calibration runtime {elapsed:.2f}s < 10s")


class TestCorpusIngestion:
    """Full-scale synthetic corpus: counts, moments, throughput."""

    def test_full_corpus(self, tmp_path):
        manifest = generate_corpus(tmp_path, n_records=166_533, n_files=24)
        stats = ParseStats()
        corpus = []
        parse_seconds = 0.0
        for name in manifest.files:
            data = (tmp_path / name).read_bytes()
            t0 = time.perf_counter()
            corpus.extend(parse_cgm_xml(data, stats=stats))
            parse_seconds += time.perf_counter() - t0
        summary = summarize(corpus)

        assert stats.records_rejected == 0
        assert summary.record_count == 166_533
        assert summary.file_count == 24
        assert abs(summary.mean_glucose - 159.58) <= 0.5, summary.mean_glucose
        assert abs(summary.std_glucose - 60.67) <= 0.5, summary.std_glucose
        assert summary.modal_interval == 5.0
        throughput = summary.record_count / parse_seconds
        assert throughput >= 50_000, throughput
        _ok(f"166,533 records, 0 rejections, mean {summary.mean_glucose:.2f}, "
            f"std {summary.std_glucose:.2f}, modal 5 min, {throughput / 1000:.0f}k rec/s")


class TestPropertySuite:
    """Compact re-assertions of the required property families."""

    def test_metric_inequality(self):
        rng = np.random.default_rng(0)
        from glucotwin.evaluation import mae, rmse
        for _ in range(200):
            n = int(rng.integers(1, 40))
            y, y_hat = rng.normal(size=n) * 100, rng.normal(size=n) * 100
            assert rmse(y, y_hat) >= mae(y, y_hat) - 1e-12
        _ok("RMSE >= MAE on 200 fuzzed vectors")

    def test_auc_monotone_transform_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            labels = rng.integers(0, 2, 30).astype(float)
            labels[0], labels[-1] = 0, 1
            scores = rng.normal(size=30)
            base = compute_auc(labels, scores)
            assert abs(compute_auc(labels, np.exp(scores)) - base) <= 1e-12
            assert abs(compute_auc(labels, 7 * scores + 3) - base) <= 1e-12
        _ok("AUC invariant under strictly increasing transforms")

    def test_gbm_monotone_training_loss(self, benchmark_ds):
        X, y = benchmark_ds.rows[:150], benchmark_ds.target[:150]
        cfg = GbmConfig(n_estimators=40)
        model = train_gbm(X, y, cfg)
        acc = np.full(len(y), model.params["f0"])
        prev = np.inf
        for tree in model.params["trees"]:
            acc += cfg.learning_rate * tree.predict(X)
            cur = float(np.sqrt(np.mean((y - acc) ** 2)))
            assert cur <= prev + 1e-12
            prev = cur
        _ok("GBM training RMSE non-increasing across 40 stages")

    def test_forest_degenerate_equals_single_tree(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(60, 4))
        y = X[:, 0] - 2 * X[:, 2] + rng.normal(0, 0.1, 60)
        forest = train_forest(X, y, ForestConfig(n_trees=1, bootstrap=False,
                                                 features_per_split=4))
        tree = grow_tree(X, y, max_depth=None, min_samples_leaf=1)
        q = rng.normal(size=(30, 4))
        assert np.array_equal(predict(forest, q), tree.predict(q))
        _ok("single-tree forest identical to a plain tree")

    def test_response_monotonicities(self):
        p = ResponseParams(baseline_glucose=110)
        peaks_c = []
        tirs_c = []
        for carbs in (0, 30, 60, 90, 120):
            out = compute_outcome(
                simulate_scenario(p, InterventionScenario("c", Action(carbs_g=carbs))), p)
            peaks_c.append(out.peak_glucose)
            tirs_c.append(out.time_in_range_pct)
        assert all(a <= b for a, b in zip(peaks_c, peaks_c[1:]))
        assert all(a >= b for a, b in zip(tirs_c, tirs_c[1:]))
        peaks_a = []
        for act in (0, 10, 25, 45):
            out = compute_outcome(
                simulate_scenario(p, InterventionScenario(
                    "a", Action(carbs_g=90, activity_min=act))), p)
            peaks_a.append(out.peak_glucose)
        assert all(a >= b for a, b in zip(peaks_a, peaks_a[1:]))
        _ok("noise-free carb and activity monotonicity")

    def test_utility_weight_scaling_invariance(self, table_calibration):
        targets, result, _ = table_calibration
        trajs = {t.scenario.label: simulate_scenario(result.params, t.scenario)
                 for t in targets}
        for c in (0.2, 1.0, 3.7, 50.0):
            base = [compute_outcome(trajs[t.scenario.label], result.params,
                                    UtilityWeights(), t.scenario.label) for t in targets]
            scaled = [compute_outcome(trajs[t.scenario.label], result.params,
                                      UtilityWeights(1.0 * c, 0.5 * c, 2.0 * c),
                                      t.scenario.label) for t in targets]
            assert [o.label for o in rank_interventions(base)] == \
                [o.label for o in rank_interventions(scaled)]
        _ok("ranking invariant under positive utility-weight scaling")

    def test_seed_determinism_across_stochastic_ops(self, benchmark_ds):
        sub = benchmark_ds.subset(np.arange(40))
        a = sequences_to_csv(augment(sub, AugmentConfig(seed=9)))
        b = sequences_to_csv(augment(sub, AugmentConfig(seed=9)))
        assert a == b
        f1 = train_forest(sub.rows, sub.target, ForestConfig(n_trees=6, seed=3))
        f2 = train_forest(sub.rows, sub.target, ForestConfig(n_trees=6, seed=3))
        assert f1.fingerprint == f2.fingerprint
        assert np.array_equal(predict(f1, sub.rows), predict(f2, sub.rows))
        m1 = train_mlp(sub.rows, sub.target, MlpConfig(epochs=5, seed=2))
        m2 = train_mlp(sub.rows, sub.target, MlpConfig(epochs=5, seed=2))
        assert np.array_equal(predict(m1, sub.rows), predict(m2, sub.rows))
        p = ResponseParams(noise_sigma=4.0)
        s = InterventionScenario("n", Action(carbs_g=30), seed=5)
        assert np.array_equal(simulate_scenario(p, s).glucose,
                              simulate_scenario(p, s).glucose)
        sa = split(benchmark_ds, SplitSpec(seed=4))
        sb = split(benchmark_ds, SplitSpec(seed=4))
        assert np.array_equal(sa[0].rows, sb[0].rows)
        _ok("seed determinism: augment, forest, mlp, scenario noise, split")

    def test_serialization_roundtrips(self, benchmark_ds):
        X, y = benchmark_ds.rows[:60], benchmark_ds.target[:60]
        for model in (train_linear(X, y),
                      train_gbm(X, y, GbmConfig(n_estimators=4)),
                      train_forest(X, y, ForestConfig(n_trees=4, seed=1)),
                      train_mlp(X, y, MlpConfig(epochs=3, seed=1))):
            again = model_from_json(model_to_json(model))
            assert np.array_equal(predict(model, X), predict(again, X))

        p = ResponseParams()
        named = [(lbl, simulate_scenario(p, InterventionScenario(lbl, Action(carbs_g=c))))
                 for lbl, c in (("a", 20), ("b", 60))]
        text = trajectories_to_csv(named)
        lines = [row.split(",") for row in text.strip().splitlines()[1:]]
        parsed = np.array([[float(v) for v in row] for row in lines])
        assert np.array_equal(parsed[:, 1], named[0][1].glucose)
        assert np.array_equal(parsed[:, 2], named[1][1].glucose)

        from glucotwin.ingest import CgmRecord, CgmSeries
        from datetime import datetime
        t0 = datetime(2023, 1, 1, 6, 0, 0)
        series = CgmSeries("rt", [CgmRecord(t0 + timedelta(minutes=5 * i), 100.0 + 0.37 * i)
                                  for i in range(10)])
        again = parse_cgm_csv(export_cgm_csv(series))
        assert again.timestamps() == series.timestamps()
        assert list(again.values()) == list(series.values())
        _ok("serialization round-trips: models, trajectories, CGM CSV")
