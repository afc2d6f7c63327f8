"""Deterministic synthetic CGM fixture corpus.

The reference CGM corpus this package mirrors is access-restricted, so
large-scale ingestion is exercised against a generated stand-in: a
configurable number of XML fixture files on a 5-minute grid whose pooled
glucose values hit a target mean and population standard deviation to
within rounding error. Same seed, same bytes.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .cgm import XML_TS_FORMAT

DEFAULT_RECORDS = 166_533
DEFAULT_FILES = 24
DEFAULT_MEAN = 159.58
DEFAULT_STD = 60.67
DEFAULT_SEED = 7_2401
# draws truncated here before moment correction; after correction values stay
# well inside the parsers' [10, 600] plausibility band
_DRAW_LO, _DRAW_HI = 40.0, 400.0


@dataclass
class CorpusManifest:
    files: list[str]
    records_per_file: list[int]
    total_records: int
    target_mean: float
    target_std: float
    seed: int


def _split_counts(total: int, parts: int, rng: np.random.Generator) -> list[int]:
    # uneven but deterministic per-file counts, exact total
    weights = rng.uniform(0.8, 1.2, parts)
    counts = np.floor(weights / weights.sum() * total).astype(int)
    counts[counts < 1] = 1
    deficit = total - int(counts.sum())
    for i in range(abs(deficit)):
        counts[i % parts] += 1 if deficit > 0 else -1
    assert counts.sum() == total and (counts > 0).all()
    return [int(c) for c in counts]


def _draw_values(n: int, mean: float, std: float, rng: np.random.Generator) -> np.ndarray:
    vals = np.empty(0)
    while vals.size < n:
        batch = rng.normal(mean, std, int((n - vals.size) * 1.2) + 64)
        batch = batch[(batch >= _DRAW_LO) & (batch <= _DRAW_HI)]
        vals = np.concatenate([vals, batch])
    vals = vals[:n]
    # exact moment correction, then integer glucose like real sensor exports
    vals = (vals - vals.mean()) / vals.std() * std + mean
    return np.rint(vals).astype(int)


def generate_corpus(out_dir: str | Path,
                    n_records: int = DEFAULT_RECORDS,
                    n_files: int = DEFAULT_FILES,
                    mean: float = DEFAULT_MEAN,
                    std: float = DEFAULT_STD,
                    seed: int = DEFAULT_SEED) -> CorpusManifest:
    """Write ``n_files`` XML fixture files totalling exactly ``n_records`` records."""
    if n_records < n_files:
        raise ValueError("need at least one record per file")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    counts = _split_counts(n_records, n_files, rng)
    values = _draw_values(n_records, mean, std, rng)

    files = []
    pos = 0
    for i, count in enumerate(counts):
        pid = f"sim-{i + 1:03d}"
        start = datetime(2021, 1, 1, 0, 0, 0) + timedelta(days=40 * i, minutes=int(rng.integers(0, 288)) * 5)
        chunk = values[pos:pos + count]
        pos += count
        lines = [f'<patient id="{pid}">', "<glucose_level>"]
        ts = start
        for v in chunk:
            lines.append(f'<event ts="{ts.strftime(XML_TS_FORMAT)}" value="{int(v)}"/>')
            ts += timedelta(minutes=5)
        lines.append("</glucose_level>")
        lines.append("</patient>")
        path = out / f"cgm_{pid}.xml"
        path.write_text("\n".join(lines) + "\n")
        files.append(path.name)
    return CorpusManifest(files, counts, n_records, mean, std, seed)
