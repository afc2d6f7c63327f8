"""Parametric postprandial response curves, outcome metrics, and ranking.

The response family is a Gaussian excursion over a baseline: a meal of
``carbs_g`` grams raises glucose by ``carb_gain * carbs_g`` at the peak
time, and activity multiplies the remaining excursion by
``exp(-attenuation * activity_min)`` from its start time onward. The
family is deliberately simple; it exists to admit the published outcome
triples, not to model physiology.

Outcome metrics follow the 5-minute grid: peak is the max, time-in-range
the fraction of grid points inside the configured band, hypoglycemia
minutes five per point below the low bound. Utility trades time-in-range
against peak excess over 180 mg/dL and hypoglycemia exposure.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from datetime import datetime

import numpy as np

from .errors import CalibrationError, ScenarioValidationError
from .ingest.cgm import CgmSeries
from .twin import Action, CausalGraph, validate_action

GRID_STEP_MIN = 5.0
UTILITY_PEAK_THRESHOLD = 180.0
DEFAULT_TIR_LOW = 70.0
DEFAULT_TIR_HIGH = 180.0
# calibration searches bump-like responses only; an unbounded width
# degenerates to a flat plateau and would fit ill-posed targets
CALIB_WIDTH_RANGE = (4.0, 40.0)
CALIB_PEAK_TIME_RANGE = (10.0, 120.0)


@dataclass(frozen=True)
class ResponseParams:
    baseline_glucose: float = 110.0
    carb_gain: float = 0.9
    time_to_peak: float = 45.0
    width: float = 16.0
    activity_attenuation: float = 0.025
    noise_sigma: float = 0.0
    tir_low: float = DEFAULT_TIR_LOW
    tir_high: float = DEFAULT_TIR_HIGH

    def __post_init__(self):
        if not 60.0 <= self.baseline_glucose <= 200.0:
            raise ValueError("baseline_glucose must be within [60, 200] mg/dL")
        if not 0.0 < self.time_to_peak <= 120.0:
            raise ValueError("time_to_peak must be in (0, 120] minutes")
        if self.width <= 0:
            raise ValueError("width must be positive")
        if not 0.0 <= self.activity_attenuation < 1.0:
            raise ValueError("activity_attenuation must be in [0, 1)")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.tir_low >= self.tir_high:
            raise ValueError("tir_low must be below tir_high")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class InterventionScenario:
    label: str
    action: Action
    duration_min: float = 120.0
    seed: int = 0

    def __post_init__(self):
        if self.duration_min <= 0:
            raise ValueError("duration_min must be positive")


@dataclass
class Trajectory:
    t_grid: np.ndarray
    glucose: np.ndarray

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        self.glucose = np.asarray(self.glucose, dtype=float)
        if self.t_grid.shape != self.glucose.shape:
            raise ValueError("t_grid and glucose must have the same length")
        if not np.all(np.isfinite(self.glucose)):
            raise ValueError("trajectory contains non-finite values")


@dataclass
class ScenarioOutcome:
    label: str
    peak_glucose: float
    time_in_range_pct: float
    hypo_minutes: float
    utility: float

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "peak_mg_dl": self.peak_glucose,
            "tir_pct": self.time_in_range_pct,
            "hypo_min": self.hypo_minutes,
            "utility": self.utility,
        }


@dataclass(frozen=True)
class UtilityWeights:
    w_tir: float = 1.0
    w_peak: float = 0.5
    w_hypo: float = 2.0

    def __post_init__(self):
        if min(self.w_tir, self.w_peak, self.w_hypo) < 0:
            raise ValueError("weights must be non-negative")
        if self.w_tir == self.w_peak == self.w_hypo == 0:
            raise ValueError("at least one weight must be positive")


def response_delta(p: ResponseParams, action: Action, t) -> np.ndarray | float:
    """Excursion above baseline at minutes ``t`` (scalar or array), >= 0."""
    t_arr = np.asarray(t, dtype=float)
    amplitude = p.carb_gain * action.carbs_g
    bump = amplitude * np.exp(-((t_arr - p.time_to_peak) ** 2) / (2.0 * p.width ** 2))
    if action.activity_min > 0:
        factor = math.exp(-p.activity_attenuation * action.activity_min)
        bump = np.where(t_arr >= action.activity_start_min, bump * factor, bump)
    return bump if t_arr.ndim else float(bump)


def scenario_grid(duration_min: float) -> np.ndarray:
    return np.arange(0.0, duration_min + GRID_STEP_MIN / 2, GRID_STEP_MIN)


def simulate_scenario(p: ResponseParams, scenario: InterventionScenario,
                      graph: CausalGraph | None = None,
                      feasible_ranges: dict | None = None) -> Trajectory:
    """Baseline + response + seeded Gaussian noise on the 5-minute grid."""
    violations = validate_action(graph or CausalGraph(), scenario.action, feasible_ranges)
    if violations:
        raise ScenarioValidationError(violations)
    t = scenario_grid(scenario.duration_min)
    glucose = p.baseline_glucose + response_delta(p, scenario.action, t)
    if p.noise_sigma > 0:
        rng = np.random.default_rng(scenario.seed)
        glucose = glucose + rng.normal(0.0, p.noise_sigma, len(t))
    return Trajectory(t, glucose)


def compute_outcome(traj: Trajectory, p: ResponseParams,
                    weights: UtilityWeights = UtilityWeights(),
                    label: str = "") -> ScenarioOutcome:
    if len(traj.glucose) == 0:
        raise ValueError("empty trajectory")
    g = traj.glucose
    peak = float(g.max())
    in_band = (g >= p.tir_low) & (g <= p.tir_high)
    tir_pct = 100.0 * float(in_band.mean())
    hypo_minutes = GRID_STEP_MIN * float(np.sum(g < p.tir_low))
    utility = (weights.w_tir * tir_pct
               - weights.w_peak * max(0.0, peak - UTILITY_PEAK_THRESHOLD)
               - weights.w_hypo * hypo_minutes)
    return ScenarioOutcome(label, peak, tir_pct, hypo_minutes, utility)


def rank_interventions(outcomes: list[ScenarioOutcome]) -> list[ScenarioOutcome]:
    """Descending utility; ties by higher TIR, then lower peak, then label."""
    if not outcomes:
        raise ValueError("nothing to rank")
    return sorted(outcomes, key=lambda o: (-o.utility, -o.time_in_range_pct,
                                           o.peak_glucose, o.label))


@dataclass(frozen=True)
class CalibrationTarget:
    scenario: InterventionScenario
    target_peak: float
    target_tir_pct: float


@dataclass
class CalibrationResult:
    params: ResponseParams
    residual: float
    achieved: list[dict]


def _precompute(targets: list[CalibrationTarget]):
    pre = []
    for t in targets:
        a = t.scenario.action
        pre.append((scenario_grid(t.scenario.duration_min), a.carbs_g, a.activity_min,
                    a.activity_start_min, t.target_peak, t.target_tir_pct))
    return pre


def _residual_pre(g0, gain, tp, w, beta, lo, hi, pre) -> float:
    # same arithmetic as simulate_scenario + compute_outcome, sans noise,
    # inlined because the calibration grid evaluates this tens of thousands
    # of times inside its runtime budget
    total = 0.0
    for grid, carbs, act_min, act_start, tgt_peak, tgt_tir in pre:
        bump = gain * carbs * np.exp(-((grid - tp) ** 2) / (2.0 * w * w))
        if act_min > 0:
            bump = np.where(grid >= act_start, bump * math.exp(-beta * act_min), bump)
        g = g0 + bump
        peak = float(g.max())
        tir = 100.0 * float(((g >= lo) & (g <= hi)).mean())
        total += (peak - tgt_peak) ** 2 + (tir - tgt_tir) ** 2
    return total


def _residual(p: ResponseParams, targets: list[CalibrationTarget]) -> float:
    pre = _precompute(targets)
    return _residual_pre(p.baseline_glucose, p.carb_gain, p.time_to_peak, p.width,
                         p.activity_attenuation, p.tir_low, p.tir_high, pre)


def _analytic_candidates(targets: list[CalibrationTarget]):
    """Moment-style seeds: solve gain/baseline from activity-free peak pairs
    and attenuation from an activity target, when the targets allow it."""
    free = [t for t in targets if t.scenario.action.activity_min == 0]
    active = [t for t in targets if t.scenario.action.activity_min > 0]
    gains, baselines, betas = [], [], []
    for i, a in enumerate(free):
        for b in free[i + 1:]:
            dc = a.scenario.action.carbs_g - b.scenario.action.carbs_g
            if dc == 0:
                continue
            gain = (a.target_peak - b.target_peak) / dc
            if gain <= 0:
                continue
            g0 = a.target_peak - gain * a.scenario.action.carbs_g
            gains.append(gain)
            baselines.append(g0)
            for act in active:
                amp_free = gain * act.scenario.action.carbs_g
                amp_act = act.target_peak - g0
                if amp_free > 0 and 0 < amp_act < amp_free:
                    betas.append(math.log(amp_free / amp_act) / act.scenario.action.activity_min)
    return gains, baselines, betas


def calibrate(targets: list[CalibrationTarget],
              fixed: dict | None = None,
              peak_tol: float = 2.0,
              tir_tol: float = 5.0) -> CalibrationResult:
    """Grid search plus coordinate refinement over the response family.

    ``fixed`` pins named :class:`ResponseParams` fields (e.g. a known
    baseline or band). Raises :class:`CalibrationError` when the best
    residual exceeds the per-target tolerance budget.
    """
    if not targets:
        raise ValueError("no calibration targets")
    fixed = dict(fixed or {})
    carb_levels = {t.scenario.action.carbs_g for t in targets}
    if len(carb_levels) < 2 and len(targets) > 1:
        raise ValueError("targets need at least two distinct carbohydrate levels")

    gains, baselines, betas = _analytic_candidates(targets)
    peak_lo = min(t.target_peak for t in targets)
    gain_grid = sorted(set(round(g, 6) for g in gains)) or [0.5, 0.7, 0.9, 1.1]
    base_grid = sorted(set(round(b, 6) for b in baselines)) or \
        [max(60.0, min(200.0, peak_lo - d)) for d in (10.0, 20.0, 30.0, 40.0)]
    beta_grid = sorted(set(round(b, 8) for b in betas)) or [0.0, 0.01, 0.02, 0.03]
    tp_grid = np.arange(CALIB_PEAK_TIME_RANGE[0], 65.0, 5.0)
    w_grid = np.arange(CALIB_WIDTH_RANGE[0], CALIB_WIDTH_RANGE[1] + 1e-9, 2.0)
    lo_grid = [65.0, 70.0, 75.0]
    hi_grid = [float(v) for v in np.arange(110.0, 186.0, 5.0)]

    pre = _precompute(targets)

    best = None
    best_res = math.inf
    for g0 in ([fixed["baseline_glucose"]] if "baseline_glucose" in fixed else base_grid):
        if not 60.0 <= g0 <= 200.0:
            continue
        for gain in ([fixed["carb_gain"]] if "carb_gain" in fixed else gain_grid):
            for beta in ([fixed["activity_attenuation"]] if "activity_attenuation" in fixed else beta_grid):
                if not 0.0 <= beta < 1.0:
                    continue
                for lo in ([fixed["tir_low"]] if "tir_low" in fixed else lo_grid):
                    for hi in ([fixed["tir_high"]] if "tir_high" in fixed else hi_grid):
                        if hi <= lo:
                            continue
                        for tp in ([fixed["time_to_peak"]] if "time_to_peak" in fixed else tp_grid):
                            for w in ([fixed["width"]] if "width" in fixed else w_grid):
                                r = _residual_pre(g0, gain, float(tp), float(w), beta, lo, hi, pre)
                                if r < best_res:
                                    best = (g0, gain, float(tp), float(w), beta, lo, hi)
                                    best_res = r

    if best is None:
        raise CalibrationError("no admissible parameters in the search grid", residual=None)

    # coordinate refinement with shrinking steps, band held fixed
    names = ["baseline_glucose", "carb_gain", "time_to_peak", "width", "activity_attenuation"]
    steps = {"baseline_glucose": 2.0, "carb_gain": 0.05,
             "time_to_peak": 2.0, "width": 1.0, "activity_attenuation": 0.005}
    bounds = {"baseline_glucose": (60.0, 200.0), "carb_gain": (1e-6, 10.0),
              "time_to_peak": CALIB_PEAK_TIME_RANGE, "width": CALIB_WIDTH_RANGE,
              "activity_attenuation": (0.0, 0.999999)}
    best = list(best)
    for _ in range(24):
        improved = False
        for pos, name in enumerate(names):
            if name in fixed:
                continue
            lo_b, hi_b = bounds[name]
            cur = best[pos]
            for cand in (cur - steps[name], cur + steps[name]):
                if not lo_b <= cand <= hi_b:
                    continue
                trial = list(best)
                trial[pos] = cand
                r = _residual_pre(*trial, pre)
                if r < best_res:
                    best, best_res = trial, r
                    improved = True
        if not improved:
            steps = {k: v * 0.5 for k, v in steps.items()}
    best = ResponseParams(
        baseline_glucose=best[0], carb_gain=best[1], time_to_peak=best[2],
        width=best[3], activity_attenuation=best[4], noise_sigma=0.0,
        tir_low=best[5], tir_high=best[6],
    )

    budget = len(targets) * (peak_tol ** 2 + tir_tol ** 2)
    achieved = []
    for t in targets:
        out = compute_outcome(simulate_scenario(replace(best, noise_sigma=0.0), t.scenario),
                              best, label=t.scenario.label)
        achieved.append({"label": t.scenario.label, "peak_mg_dl": out.peak_glucose,
                         "tir_pct": out.time_in_range_pct,
                         "target_peak": t.target_peak, "target_tir_pct": t.target_tir_pct})
    if best_res > budget:
        raise CalibrationError(
            f"calibration failed: best residual {best_res:.1f} exceeds budget {budget:.1f}",
            residual=best_res,
        )
    return CalibrationResult(best, best_res, achieved)


def overlay_counterfactual(window: CgmSeries, anchor: datetime, p: ResponseParams,
                           scenarios: list[InterventionScenario],
                           baseline_label: str = "baseline") -> list[tuple[str, Trajectory]]:
    """Apply counterfactual response deltas relative to an observed window.

    Each output trajectory is the observed curve plus the scenario's delta
    minus the baseline scenario's delta, so the baseline maps to the
    observed window unchanged.
    """
    if window.has_gaps():
        raise ValueError("overlay needs a gap-free window (impute first)")
    stamps = window.timestamps()
    if not stamps:
        raise ValueError("empty window")
    if not stamps[0] <= anchor <= stamps[-1]:
        raise ValueError(f"anchor {anchor} outside window [{stamps[0]}, {stamps[-1]}]")
    baseline = next((s for s in scenarios if s.label == baseline_label), None)
    if baseline is None:
        raise ValueError(f"scenarios must include the reference label {baseline_label!r}")

    observed = window.values()
    rel_min = np.array([(ts - stamps[0]).total_seconds() / 60.0 for ts in stamps])
    dt = np.array([(ts - anchor).total_seconds() / 60.0 for ts in stamps])
    after = dt >= 0

    base_delta = np.zeros(len(stamps))
    base_delta[after] = response_delta(p, baseline.action, dt[after])
    out = []
    for s in scenarios:
        delta = np.zeros(len(stamps))
        delta[after] = response_delta(p, s.action, dt[after])
        # grouping keeps the baseline overlay bit-identical to the observed
        # window (its delta difference is exactly zero)
        out.append((s.label, Trajectory(rel_min, observed + (delta - base_delta))))
    return out


def trajectories_to_csv(named: list[tuple[str, Trajectory]]) -> str:
    """Wide plotting format: one time column, one column per scenario."""
    if not named:
        raise ValueError("no trajectories")
    grid = named[0][1].t_grid
    for label, traj in named:
        if len(traj.t_grid) != len(grid) or not np.allclose(traj.t_grid, grid):
            raise ValueError("trajectories must share one time grid")
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["t_min"] + [label for label, _ in named])
    for i, t in enumerate(grid):
        w.writerow([repr(float(t))] + [repr(float(traj.glucose[i])) for _, traj in named])
    return buf.getvalue()


def outcomes_to_csv(outcomes: list[ScenarioOutcome]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["label", "peak_mg_dl", "tir_pct", "hypo_min", "utility"])
    for o in outcomes:
        w.writerow([o.label, repr(o.peak_glucose), repr(o.time_in_range_pct),
                    repr(o.hypo_minutes), repr(o.utility)])
    return buf.getvalue()


def outcomes_to_json(outcomes: list[ScenarioOutcome]) -> str:
    return json.dumps([o.to_dict() for o in outcomes], indent=2)
