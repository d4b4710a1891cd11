"""Hourly station series: CSV ingestion, log transform, alignment, disk format.

A series is a contiguous hourly grid starting at an epoch-hour ``t0``; missing
hours are NaN slots.  One CSV file holds one station.  The canonical on-disk
representation is a two-line JSON-lines sidecar (header record + value array).
"""

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import IngestError, FormatError

FRAME_FORMAT = "koopmon-series"
FRAME_VERSION = 1

DEFAULT_COLUMNS = {"station_id": "station_id", "timestamp": "timestamp", "value": "value"}


@dataclass
class SeriesFrame:
    """One station's hourly series; index i holds the value at hour t0 + i."""

    station_id: str
    t0: int
    values: np.ndarray
    units_tag: str = "ppb"
    counters: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("series values must be one-dimensional")
        present = self.values[~np.isnan(self.values)]
        if present.size and not np.all(np.isfinite(present)):
            raise ValueError("present values must be finite")
        self.t0 = int(self.t0)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeriesFrame):
            return NotImplemented
        return (self.station_id == other.station_id
                and self.t0 == other.t0
                and self.units_tag == other.units_tag
                and len(self) == len(other)
                and bool(np.array_equal(self.values, other.values, equal_nan=True)))

    @property
    def t_end(self) -> int:
        """First hour past the grid."""
        return self.t0 + len(self)

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self), dtype=np.int64)

    def present_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def n_present(self) -> int:
        return int(self.present_mask().sum())

    def slice_hours(self, t_lo: int, t_hi: int) -> "SeriesFrame":
        """Sub-frame covering [t_lo, t_hi); hours outside the grid are missing."""
        if t_hi <= t_lo:
            raise ValueError("empty hour range")
        out = np.full(t_hi - t_lo, np.nan)
        lo = max(t_lo, self.t0)
        hi = min(t_hi, self.t_end)
        if hi > lo:
            out[lo - t_lo:hi - t_lo] = self.values[lo - self.t0:hi - self.t0]
        return SeriesFrame(self.station_id, t_lo, out, self.units_tag)


@dataclass
class StationPair:
    """Observation series plus an optional domain-model series on one grid."""

    obs: SeriesFrame
    model: SeriesFrame | None = None

    def __post_init__(self):
        if self.model is not None:
            if self.model.t0 != self.obs.t0 or len(self.model) != len(self.obs):
                raise ValueError("obs and model series must share the hour grid")


def _parse_timestamp(text: str) -> tuple[int, bool]:
    """ISO-8601 with explicit offset -> (epoch-hour UTC, was sub-hourly)."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        raise ValueError("timestamp lacks a UTC offset")
    ts = ts.astimezone(timezone.utc)
    truncated = ts.minute != 0 or ts.second != 0 or ts.microsecond != 0
    ts = ts.replace(minute=0, second=0, microsecond=0)
    return int(ts.timestamp()) // 3600, truncated


def parse_csv(path, column_map: dict | None = None) -> SeriesFrame:
    """Read one station's CSV export onto the hourly grid.

    Duplicate hours resolve last-write-wins; sub-hourly timestamps are
    truncated to the hour.  Gaps between the first and last observed hour
    become missing slots.
    """
    cols = dict(DEFAULT_COLUMNS)
    if column_map:
        cols.update(column_map)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    rows: dict[int, float] = {}
    station = None
    n_dup = 0
    n_subhourly = 0
    n_bad = 0
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestError(f"{path}: empty file")
        for name in cols.values():
            if name not in reader.fieldnames:
                raise IngestError(f"{path}: missing column {name!r}")
        for row in reader:
            try:
                hour, truncated = _parse_timestamp(row[cols["timestamp"]])
                value = float(row[cols["value"]])
                if not math.isfinite(value):
                    raise ValueError("non-finite value")
            except (ValueError, TypeError, KeyError):
                n_bad += 1
                continue
            sid = (row.get(cols["station_id"]) or "").strip()
            if station is None:
                station = sid
            elif sid != station:
                raise IngestError(
                    f"{path}: mixed station ids {station!r} and {sid!r}; expected one station per file")
            if truncated:
                n_subhourly += 1
            if hour in rows:
                n_dup += 1
            rows[hour] = value
    if not rows:
        raise IngestError(f"{path}: no parseable rows")
    t0 = min(rows)
    values = np.full(max(rows) - t0 + 1, np.nan)
    for hour, value in rows.items():
        values[hour - t0] = value
    frame = SeriesFrame(station or "", t0, values)
    frame.counters = {"duplicates": n_dup, "subhourly": n_subhourly, "bad_rows": n_bad}
    return frame


def log_transform(s: SeriesFrame) -> SeriesFrame:
    """Natural log of present values; nonpositive readings become missing."""
    if s.units_tag.startswith("log-"):
        raise ValueError(f"series already log-transformed ({s.units_tag})")
    values = s.values.copy()
    present = ~np.isnan(values)
    bad = present & (values <= 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = np.where(present & ~bad, np.log(values), np.nan)
    out = SeriesFrame(s.station_id, s.t0, values, "log-" + s.units_tag)
    out.counters = dict(s.counters)
    out.counters["dropped_nonpositive"] = int(bad.sum())
    return out


def align_pair(obs: SeriesFrame, model: SeriesFrame) -> StationPair:
    """Re-index both series onto their union hour grid, missing-filled."""
    if obs.t_end <= model.t0 or model.t_end <= obs.t0:
        raise IngestError(
            f"series do not overlap: obs covers [{obs.t0}, {obs.t_end}), "
            f"model covers [{model.t0}, {model.t_end})")
    t0 = min(obs.t0, model.t0)
    t_hi = max(obs.t_end, model.t_end)
    return StationPair(obs.slice_hours(t0, t_hi), model.slice_hours(t0, t_hi))


def write_frame(frame: SeriesFrame, path) -> None:
    """Two-line JSON-lines sidecar: header record, then the value array."""
    header = {
        "format": FRAME_FORMAT,
        "version": FRAME_VERSION,
        "station_id": frame.station_id,
        "t0": frame.t0,
        "units_tag": frame.units_tag,
        "n": len(frame),
    }
    values = [None if math.isnan(v) else v for v in frame.values]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        fh.write(json.dumps({"values": values}) + "\n")


def read_frame(path) -> SeriesFrame:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2:
        raise FormatError(f"{path}: truncated series file")
    try:
        header = json.loads(lines[0])
        body = json.loads(lines[1])
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not a series file: {exc}") from exc
    if header.get("format") != FRAME_FORMAT:
        raise FormatError(f"{path}: unexpected format tag {header.get('format')!r}")
    if header.get("version") != FRAME_VERSION:
        raise FormatError(
            f"{path}: series format version {header.get('version')!r}, expected {FRAME_VERSION}")
    values = np.array([np.nan if v is None else float(v) for v in body["values"]])
    if values.size != header["n"]:
        raise FormatError(f"{path}: value count {values.size} != header n {header['n']}")
    return SeriesFrame(header["station_id"], header["t0"], values, header["units_tag"])


def write_csv(frame: SeriesFrame, path) -> None:
    """Emit the ingestion CSV format; missing hours produce no row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["station_id", "timestamp", "value"])
        for i, value in enumerate(frame.values):
            if math.isnan(value):
                continue
            ts = datetime.fromtimestamp((frame.t0 + i) * 3600, tz=timezone.utc)
            writer.writerow([frame.station_id, ts.isoformat(), repr(value)])
