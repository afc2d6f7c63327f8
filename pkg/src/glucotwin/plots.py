"""Figure rendering for the CLI report paths.

Every figure goes straight to a file via the Agg backend; nothing here
opens a window. Each helper mirrors one delimited artifact (trajectory
CSV, outcome CSV, benchmark report) so reports ship as CSV plus PNG.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .counterfactual import ScenarioOutcome, Trajectory  # noqa: E402
from .evaluation import EvalReport  # noqa: E402
from .ingest.cgm import CgmSeries  # noqa: E402


def save_trajectories(named: list[tuple[str, Trajectory]], path: str | Path,
                      tir_low: float | None = None, tir_high: float | None = None,
                      title: str = "Simulated glucose trajectories") -> Path:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if tir_low is not None and tir_high is not None:
        ax.axhspan(tir_low, tir_high, color="tab:green", alpha=0.12, label="target range")
    for label, traj in named:
        ax.plot(traj.t_grid, traj.glucose, label=label, linewidth=1.8)
    ax.set_xlabel("minutes")
    ax.set_ylabel("glucose (mg/dL)")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def save_outcomes(outcomes: list[ScenarioOutcome], path: str | Path) -> Path:
    labels = [o.label for o in outcomes]
    fig, axes = plt.subplots(1, 3, figsize=(10, 3.2))
    for ax, attr, name in zip(
        axes,
        ("peak_glucose", "time_in_range_pct", "utility"),
        ("peak (mg/dL)", "time in range (%)", "utility"),
    ):
        ax.bar(labels, [getattr(o, attr) for o in outcomes], color="tab:blue")
        ax.set_title(name, fontsize=9)
        ax.tick_params(axis="x", rotation=20, labelsize=7)
        ax.grid(axis="y", alpha=0.3)
    fig.suptitle("Scenario outcomes")
    return _save(fig, path)


def save_benchmark(report: EvalReport, path: str | Path) -> Path:
    means = report.mean_rows()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    reg = [(r.model, r.rmse) for r in means if r.rmse is not None]
    ax1.bar([m for m, _ in reg], [v for _, v in reg], color="tab:blue")
    ax1.set_title(f"test RMSE (mean over {len(report.seeds)} seeds)")
    ax1.grid(axis="y", alpha=0.3)
    cls = [(r.model, r.auc) for r in means if r.auc is not None]
    ax2.bar([m for m, _ in cls], [v for _, v in cls], color="tab:orange")
    ax2.set_ylim(0.0, 1.0)
    ax2.set_title("test AUC")
    ax2.grid(axis="y", alpha=0.3)
    for ax in (ax1, ax2):
        ax.tick_params(axis="x", rotation=15, labelsize=8)
    return _save(fig, path)


def save_cgm_series(series: CgmSeries, path: str | Path, max_points: int = 2000) -> Path:
    stamps = series.timestamps()
    vals = series.values()
    stride = max(1, len(stamps) // max_points)
    fig, ax = plt.subplots(figsize=(9, 3.5))
    ax.plot(stamps[::stride], vals[::stride], linewidth=0.9, color="tab:blue")
    ax.set_ylabel("glucose (mg/dL)")
    ax.set_title(f"CGM series {series.patient_id}")
    ax.grid(alpha=0.3)
    fig.autofmt_xdate()
    return _save(fig, path)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
