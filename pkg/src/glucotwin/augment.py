"""Temporal augmentation of static benchmark rows.

Each row is extended into a short sequence of equally spaced steps sharing
one intervention context (carbohydrate grams, activity minutes, timing
offset) drawn uniformly from configured ranges. Step outcomes deviate from
the source target by a declared linear drift: positive per carbohydrate
gram above the configured range midpoint, negative per activity minute.
These coefficients are architecture knobs, not physiology.

Everything is a pure function of the seed; row ``i`` draws from an
independent substream keyed ``(seed, i)`` so per-row generation order
cannot change the output.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .ingest.tabular import TabularDataset

CARB_DRIFT_PER_GRAM = 0.8
ACTIVITY_DRIFT_PER_MINUTE = -1.2


@dataclass(frozen=True)
class AugmentConfig:
    sequence_length: int = 6
    step_minutes: float = 20.0
    carb_range: tuple[float, float] = (20.0, 90.0)
    activity_range: tuple[float, float] = (0.0, 30.0)
    timing_range: tuple[float, float] = (0.0, 60.0)
    noise_sigma: float = 0.05
    seed: int = 0
    carb_drift: float = CARB_DRIFT_PER_GRAM
    activity_drift: float = ACTIVITY_DRIFT_PER_MINUTE

    def __post_init__(self):
        if self.sequence_length < 2:
            raise ValueError("sequence_length must be at least 2")
        if self.step_minutes <= 0:
            raise ValueError("step_minutes must be positive")
        for name in ("carb_range", "activity_range", "timing_range"):
            lo, hi = getattr(self, name)
            if hi < lo:
                raise ValueError(f"{name} must be (lo, hi) with lo <= hi")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


@dataclass
class SequenceStep:
    t_offset: float
    features: np.ndarray
    carbs_g: float
    activity_min: float
    timing_min: float
    outcome: float


@dataclass
class AugmentedSequence:
    source_row: int
    steps: list[SequenceStep] = field(default_factory=list)


def augment(ds: TabularDataset, cfg: AugmentConfig) -> list[AugmentedSequence]:
    """One intervention-annotated sequence per source row, fully seeded."""
    if ds.n_rows == 0:
        raise ValueError("dataset is empty")
    feature_std = ds.rows.std(axis=0)
    target_std = float(ds.target.std())
    carb_mid = (cfg.carb_range[0] + cfg.carb_range[1]) / 2.0

    sequences = []
    for i in range(ds.n_rows):
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, i)))
        carbs = float(rng.uniform(*cfg.carb_range))
        activity = float(rng.uniform(*cfg.activity_range))
        timing = float(rng.uniform(*cfg.timing_range))
        drift = cfg.carb_drift * (carbs - carb_mid) + cfg.activity_drift * activity
        seq = AugmentedSequence(source_row=i)
        for k in range(cfg.sequence_length):
            feat_noise = rng.normal(0.0, 1.0, ds.n_features) * (cfg.noise_sigma * feature_std)
            out_noise = float(rng.normal(0.0, 1.0)) * (cfg.noise_sigma * target_std)
            seq.steps.append(SequenceStep(
                t_offset=k * cfg.step_minutes,
                features=ds.rows[i] + feat_noise,
                carbs_g=carbs,
                activity_min=activity,
                timing_min=timing,
                outcome=float(ds.target[i]) + drift + out_noise,
            ))
        sequences.append(seq)
    return sequences


def flatten(sequences: list[AugmentedSequence]) -> TabularDataset:
    """One row per step; features gain [t_offset, carbs_g, activity_min, timing_min]."""
    if not sequences:
        return TabularDataset([], np.zeros((0, 0)), np.zeros(0))
    n_steps = len(sequences[0].steps)
    d = len(sequences[0].steps[0].features)
    for s in sequences:
        if len(s.steps) != n_steps:
            raise ValueError("sequences have heterogeneous step counts")
    names = [f"f{j}" for j in range(d)] + ["t_offset", "carbs_g", "activity_min", "timing_min"]
    rows, target = [], []
    for s in sequences:
        for st in s.steps:
            rows.append(np.concatenate([st.features,
                                        [st.t_offset, st.carbs_g, st.activity_min, st.timing_min]]))
            target.append(st.outcome)
    return TabularDataset(names, np.array(rows), np.array(target))


def sequences_to_csv(sequences: list[AugmentedSequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    d = len(sequences[0].steps[0].features) if sequences and sequences[0].steps else 0
    w.writerow(["source_row", "t_offset"] + [f"f{j}" for j in range(d)]
               + ["carbs_g", "activity_min", "timing_min", "outcome"])
    for s in sequences:
        for st in s.steps:
            w.writerow([s.source_row, repr(st.t_offset)] + [repr(float(v)) for v in st.features]
                       + [repr(st.carbs_g), repr(st.activity_min), repr(st.timing_min), repr(st.outcome)])
    return buf.getvalue()


def sequences_to_json(sequences: list[AugmentedSequence]) -> str:
    doc = [
        {
            "source_row": s.source_row,
            "steps": [
                {
                    "t_offset": st.t_offset,
                    "features": [float(v) for v in st.features],
                    "carbs_g": st.carbs_g,
                    "activity_min": st.activity_min,
                    "timing_min": st.timing_min,
                    "outcome": st.outcome,
                }
                for st in s.steps
            ],
        }
        for s in sequences
    ]
    return json.dumps(doc, indent=2)
