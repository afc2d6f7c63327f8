"""CGM parsing and canonicalization.

Two wire formats are supported: the XML fixture schema
(``<patient id="..."><glucose_level><event ts="DD-MM-YYYY HH:MM:SS"
value="INT"/>...</glucose_level></patient>``) and a portable CSV with
header ``timestamp,glucose_mg_dl`` (ISO-8601 timestamps).

Both parsers apply the same canonicalization: records sorted ascending,
duplicate timestamps collapsed keeping the last value seen in document
order, and glucose values outside the physiological plausibility band
rejected (counted in :class:`ParseStats`, never silently dropped).
"""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from xml.parsers import expat

import numpy as np

from ..errors import FormatError, GlucotwinError, ImputationError, ParseError, RecordError

GLUCOSE_MIN_MG_DL = 10.0
GLUCOSE_MAX_MG_DL = 600.0
XML_TS_FORMAT = "%d-%m-%Y %H:%M:%S"
CSV_HEADER = ["timestamp", "glucose_mg_dl"]


@dataclass(frozen=True)
class CgmRecord:
    """One timestamped glucose reading; ``glucose is None`` marks a gap slot."""

    timestamp: datetime
    glucose: float | None
    imputed: bool = False


@dataclass
class CgmSeries:
    """Ordered glucose records for one patient.

    ``grid_interval`` (minutes) is set once the series has been resampled
    onto a regular grid and cleared again by operations that break it.
    """

    patient_id: str
    records: list[CgmRecord]
    grid_interval: float | None = None

    def __post_init__(self):
        for a, b in zip(self.records, self.records[1:]):
            if b.timestamp <= a.timestamp:
                raise ValueError(
                    f"timestamps must be strictly increasing: {a.timestamp} >= {b.timestamp}"
                )

    def __len__(self):
        return len(self.records)

    def timestamps(self) -> list[datetime]:
        return [r.timestamp for r in self.records]

    def values(self) -> np.ndarray:
        """Glucose values with gaps as NaN."""
        return np.array(
            [math.nan if r.glucose is None else r.glucose for r in self.records], dtype=float
        )

    def has_gaps(self) -> bool:
        return any(r.glucose is None for r in self.records)


@dataclass
class CgmSummary:
    record_count: int
    file_count: int
    mean_glucose: float
    std_glucose: float
    min_glucose: float
    max_glucose: float
    modal_interval: float | None

    def to_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "file_count": self.file_count,
            "mean_glucose": self.mean_glucose,
            "std_glucose": self.std_glucose,
            "min_glucose": self.min_glucose,
            "max_glucose": self.max_glucose,
            "modal_interval": self.modal_interval,
        }


@dataclass
class ParseStats:
    """Tally of record-level rejections accumulated across parse calls."""

    records_accepted: int = 0
    records_rejected: int = 0
    rejections: list[str] = field(default_factory=list)

    def reject(self, reason: str):
        self.records_rejected += 1
        self.rejections.append(reason)


def _canonicalize(raw: list[tuple[datetime, float]]) -> list[CgmRecord]:
    # last-write-wins on duplicate timestamps, then ascending sort
    dedup: dict[datetime, float] = {}
    for ts, g in raw:
        dedup[ts] = g
    return [CgmRecord(ts, dedup[ts]) for ts in sorted(dedup)]


def parse_cgm_xml(data: bytes, stats: ParseStats | None = None) -> list[CgmSeries]:
    """Parse an XML fixture document into one series per ``<patient>`` element.

    Raises :class:`ParseError` (with byte offset) on malformed XML and
    :class:`RecordError` (with line number) on unparseable event attributes.
    Glucose outside [10, 600] mg/dL rejects the record into ``stats``.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    stats = stats if stats is not None else ParseStats()
    parser = expat.ParserCreate()
    patients: list[tuple[str, list[tuple[datetime, float]]]] = []
    current: list[tuple[datetime, float]] | None = None

    def start(name, attrs):
        nonlocal current
        if name == "patient":
            current = []
            patients.append((attrs.get("id", f"patient-{len(patients) + 1}"), current))
        elif name == "event":
            if current is None:
                raise RecordError("event outside a patient element", line=parser.CurrentLineNumber)
            ts_text = attrs.get("ts")
            value_text = attrs.get("value")
            try:
                ts = datetime.strptime(ts_text, XML_TS_FORMAT)
            except (TypeError, ValueError):
                raise RecordError(
                    f"timestamp {ts_text!r} does not match DD-MM-YYYY HH:MM:SS",
                    line=parser.CurrentLineNumber,
                ) from None
            try:
                glucose = float(value_text)
            except (TypeError, ValueError):
                raise RecordError(
                    f"glucose value {value_text!r} is not numeric", line=parser.CurrentLineNumber
                ) from None
            if not GLUCOSE_MIN_MG_DL <= glucose <= GLUCOSE_MAX_MG_DL:
                stats.reject(f"glucose {glucose} outside [{GLUCOSE_MIN_MG_DL}, {GLUCOSE_MAX_MG_DL}]")
                return
            stats.records_accepted += 1
            current.append((ts, glucose))

    def end(name):
        nonlocal current
        if name == "patient":
            current = None

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    try:
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise ParseError(f"malformed XML: {expat.errors.messages[exc.code]}",
                         offset=parser.ErrorByteIndex, line=exc.lineno) from None
    if not patients:
        raise FormatError("document contains no <patient> element")
    return [CgmSeries(pid, _canonicalize(raw)) for pid, raw in patients]


def parse_cgm_csv(data: bytes | str, patient_id: str = "csv",
                  stats: ParseStats | None = None) -> CgmSeries:
    """Parse ``timestamp,glucose_mg_dl`` CSV; same canonicalization as XML."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    stats = stats if stats is not None else ParseStats()
    reader = csv.reader(io.StringIO(data))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty document, expected header timestamp,glucose_mg_dl") from None
    if [h.strip() for h in header] != CSV_HEADER:
        raise FormatError(f"expected header {','.join(CSV_HEADER)}, got {','.join(header)}")
    raw: list[tuple[datetime, float]] = []
    for i, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise RecordError(f"expected 2 fields, got {len(row)}", row=i)
        try:
            ts = datetime.fromisoformat(row[0].strip())
        except ValueError:
            raise RecordError(f"timestamp {row[0]!r} is not ISO-8601", row=i) from None
        try:
            glucose = float(row[1])
        except ValueError:
            raise RecordError(f"glucose value {row[1]!r} is not numeric", row=i) from None
        if not GLUCOSE_MIN_MG_DL <= glucose <= GLUCOSE_MAX_MG_DL:
            stats.reject(f"glucose {glucose} outside [{GLUCOSE_MIN_MG_DL}, {GLUCOSE_MAX_MG_DL}]")
            continue
        stats.records_accepted += 1
        raw.append((ts, glucose))
    return CgmSeries(patient_id, _canonicalize(raw))


def export_cgm_csv(series: CgmSeries) -> str:
    """Render a gap-free series back to the CSV wire format (exact round-trip)."""
    if series.has_gaps():
        raise ValueError("cannot export a series with unfilled gaps")
    lines = [",".join(CSV_HEADER)]
    for r in series.records:
        lines.append(f"{r.timestamp.isoformat()},{r.glucose!r}")
    return "\n".join(lines) + "\n"


def resample(series: CgmSeries, interval: float) -> CgmSeries:
    """Snap records onto a regular grid anchored at the first record.

    Each grid point takes the nearest record within ``interval/2`` minutes
    (ties: the later record wins); grid points with no record within reach
    become gap slots for :func:`impute_gaps`.
    """
    if interval <= 0:
        raise ValueError("interval must be positive")
    if not series.records:
        raise ValueError("cannot resample an empty series")
    known = [r for r in series.records if r.glucose is not None]
    if not known:
        raise ValueError("cannot resample a series with no glucose values")
    t0 = known[0].timestamp
    span_min = (known[-1].timestamp - t0).total_seconds() / 60.0
    n_slots = int(math.floor(span_min / interval + 0.5)) + 1

    best: list[tuple[float, float] | None] = [None] * n_slots
    for r in known:
        offset = (r.timestamp - t0).total_seconds() / 60.0
        slot = int(math.floor(offset / interval + 0.5))
        if not 0 <= slot < n_slots:
            continue
        dist = abs(offset - slot * interval)
        if dist > interval / 2.0:
            continue
        prev = best[slot]
        if prev is None or dist <= prev[0]:  # <= : later record wins ties
            best[slot] = (dist, r.glucose)

    records = []
    for slot in range(n_slots):
        ts = t0 + timedelta(minutes=slot * interval)
        value = None if best[slot] is None else best[slot][1]
        records.append(CgmRecord(ts, value))
    return CgmSeries(series.patient_id, records, grid_interval=float(interval))


def impute_gaps(series: CgmSeries, policy: str = "linear") -> CgmSeries:
    """Fill (or remove) gap slots in a resampled series.

    ``linear`` interpolates between the surrounding known values (boundary
    gaps take the nearest known value), ``hold-last`` carries the previous
    value forward, ``drop`` removes gap slots. Filled slots are flagged.
    """
    if series.grid_interval is None:
        raise ValueError("impute_gaps requires a resampled series")
    if policy not in ("linear", "hold-last", "drop"):
        raise ValueError(f"unknown policy {policy!r}")

    records = series.records
    if policy == "drop":
        kept = [r for r in records if r.glucose is not None]
        return CgmSeries(series.patient_id, kept, grid_interval=None)

    known_idx = [i for i, r in enumerate(records) if r.glucose is not None]
    if not known_idx:
        raise ImputationError("series has no known values to impute from")
    if policy == "hold-last":
        if records[0].glucose is None:
            raise ImputationError("leading gap: no value to hold")
        out = []
        last = None
        for r in records:
            if r.glucose is None:
                out.append(replace(r, glucose=last, imputed=True))
            else:
                last = r.glucose
                out.append(r)
        return CgmSeries(series.patient_id, out, grid_interval=series.grid_interval)

    # linear
    out = list(records)
    first, last = known_idx[0], known_idx[-1]
    for i in range(first):
        out[i] = replace(out[i], glucose=records[first].glucose, imputed=True)
    for i in range(last + 1, len(records)):
        out[i] = replace(out[i], glucose=records[last].glucose, imputed=True)
    for a, b in zip(known_idx, known_idx[1:]):
        ga, gb = records[a].glucose, records[b].glucose
        for i in range(a + 1, b):
            frac = (i - a) / (b - a)
            out[i] = replace(out[i], glucose=ga + frac * (gb - ga), imputed=True)
    return CgmSeries(series.patient_id, out, grid_interval=series.grid_interval)


def summarize(corpus: list[CgmSeries]) -> CgmSummary:
    """Pool glucose values across series; std uses the population divisor N."""
    if not corpus:
        raise GlucotwinError("cannot summarize an empty corpus")
    pooled = []
    intervals: Counter = Counter()
    for series in corpus:
        vals = [r.glucose for r in series.records if r.glucose is not None]
        pooled.extend(vals)
        stamps = [r.timestamp for r in series.records if r.glucose is not None]
        for a, b in zip(stamps, stamps[1:]):
            intervals[(b - a).total_seconds() / 60.0] += 1
    if not pooled:
        raise GlucotwinError("corpus contains no glucose records")
    arr = np.asarray(pooled, dtype=float)
    modal = None
    if intervals:
        top = max(intervals.values())
        modal = min(k for k, v in intervals.items() if v == top)
    return CgmSummary(
        record_count=int(arr.size),
        file_count=len(corpus),
        mean_glucose=float(arr.mean()),
        std_glucose=float(arr.std()),
        min_glucose=float(arr.min()),
        max_glucose=float(arr.max()),
        modal_interval=modal,
    )
