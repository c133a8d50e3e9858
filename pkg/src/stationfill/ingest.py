"""CSV ingestion, completeness validation, and gap detection.

File formats (UTF-8, LF line endings):

* observations: header ``station_id,timestamp,variable,value`` with
  timestamps ``YYYY-MM-DDTHH:MM:SSZ``, variable ``temperature`` or
  ``rainfall``, and value a decimal, empty (missing) or the literal
  ``null``.
* station metadata: header ``station_id,longitude,latitude,label``.

Timestamps must land exactly on the cadence grid anchored at each
series' earliest timestamp truncated to midnight; nothing is snapped.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, TextIO, Union

import numpy as np

from .errors import (
    CoordinateOutOfRange,
    DuplicateSlot,
    DuplicateStationId,
    MalformedRow,
    OffGridTimestamp,
    UnknownVariable,
    UnparseableValue,
)
from .model import (
    DEFAULT_CADENCE,
    UTC,
    GapClass,
    GapSpan,
    StationMeta,
    StationSeries,
    Variable,
    classify_gap,
)

OBS_HEADER = ["station_id", "timestamp", "variable", "value"]
META_HEADER = ["station_id", "longitude", "latitude", "label"]

#: Widest plausibility bounds with any evidence behind them; override via config.
DEFAULT_BOUNDS: dict[Variable, tuple[float, float]] = {
    Variable.TEMPERATURE: (-35.2, 60.0),
    Variable.RAINFALL: (0.0, 500.0),
}

DAY = timedelta(days=1)


def _parse_timestamp(text: str, path: str, line: int) -> datetime:
    # Strict YYYY-MM-DDTHH:MM:SSZ, no tolerance for variants.
    if (
        len(text) != 20
        or text[10] != "T"
        or text[19] != "Z"
        or text[13] != ":"
        or text[16] != ":"
    ):
        raise MalformedRow(path, line, f"bad timestamp {text!r}")
    try:
        ts = datetime.fromisoformat(text[:19])
    except ValueError:
        raise MalformedRow(path, line, f"bad timestamp {text!r}") from None
    return ts.replace(tzinfo=UTC)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(UTC).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_station_meta(path: Union[str, Path]) -> list[StationMeta]:
    """Parse the station metadata CSV, enforcing coordinate ranges and unique ids."""
    path = str(path)
    out: list[StationMeta] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != META_HEADER:
            raise MalformedRow(path, 1, f"expected header {','.join(META_HEADER)}")
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise MalformedRow(path, line, f"expected 4 fields, got {len(row)}")
            station_id, lon_text, lat_text, label = row
            if not station_id:
                raise MalformedRow(path, line, "empty station_id")
            if station_id in seen:
                raise DuplicateStationId(f"{path}:{line}: duplicate id {station_id!r}")
            try:
                lon = float(lon_text)
                lat = float(lat_text)
            except ValueError:
                raise MalformedRow(path, line, "unparseable coordinate") from None
            try:
                meta = StationMeta(station_id, lon, lat, label or None)
            except CoordinateOutOfRange as exc:
                raise CoordinateOutOfRange(f"{path}:{line}: {exc}") from None
            seen.add(station_id)
            out.append(meta)
    return out


def write_station_meta(path: Union[str, Path], stations: Sequence[StationMeta]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(META_HEADER)
        for st in stations:
            writer.writerow(
                [st.station_id, repr(st.longitude), repr(st.latitude), st.label or ""]
            )


def parse_observations(
    path: Union[str, Path], cadence: timedelta = DEFAULT_CADENCE
) -> list[StationSeries]:
    """Parse the observations CSV into one series per (station, variable).

    Slots are aligned to the cadence grid anchored at each series' earliest
    timestamp truncated to midnight, and the series is padded to whole days
    so expected-record arithmetic holds. Empty values and literal ``null``
    both become missing slots; null slots are recorded separately.
    """
    path = str(path)
    if cadence <= timedelta(0):
        raise ValueError("cadence must be positive")
    rows: dict[tuple[str, Variable], list[tuple[datetime, Optional[float], bool]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != OBS_HEADER:
            raise MalformedRow(path, 1, f"expected header {','.join(OBS_HEADER)}")
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise MalformedRow(path, line, f"expected 4 fields, got {len(row)}")
            station_id, ts_text, var_text, value_text = row
            if not station_id:
                raise MalformedRow(path, line, "empty station_id")
            try:
                variable = Variable(var_text)
            except ValueError:
                raise UnknownVariable(f"{path}:{line}: {var_text!r}") from None
            ts = _parse_timestamp(ts_text, path, line)
            if value_text == "":
                value, is_null = None, False
            elif value_text == "null":
                value, is_null = None, True
            else:
                try:
                    value, is_null = float(value_text), False
                except ValueError:
                    raise UnparseableValue(
                        f"{path}:{line}: {value_text!r}"
                    ) from None
            rows.setdefault((station_id, variable), []).append((ts, value, is_null))

    out: list[StationSeries] = []
    for (station_id, variable), triples in sorted(
        rows.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
    ):
        earliest = min(t for t, _, _ in triples)
        start = earliest.replace(hour=0, minute=0, second=0, microsecond=0)
        slot_of: dict[int, tuple[Optional[float], bool]] = {}
        for ts, value, is_null in triples:
            delta = ts - start
            if delta % cadence != timedelta(0):
                raise OffGridTimestamp(
                    f"{path}: {station_id}/{variable} {format_timestamp(ts)} "
                    f"off the {cadence} grid anchored at {format_timestamp(start)}"
                )
            slot = delta // cadence
            if slot in slot_of:
                raise DuplicateSlot(
                    f"{path}: {station_id}/{variable} duplicate slot at "
                    f"{format_timestamp(ts)}"
                )
            slot_of[slot] = (value, is_null)
        n = max(slot_of) + 1
        if DAY % cadence == timedelta(0):
            per_day = DAY // cadence
            n = -(-n // per_day) * per_day  # pad to whole days
        values = np.full(n, np.nan)
        null_slots = set()
        for slot, (value, is_null) in slot_of.items():
            if value is not None:
                values[slot] = value
            elif is_null:
                null_slots.add(slot)
        out.append(
            StationSeries(
                station_id=station_id,
                variable=variable,
                start=start,
                values=values,
                cadence=cadence,
                null_slots=frozenset(null_slots),
            )
        )
    return out


def _format_value(v: float) -> str:
    # repr round-trips float64 exactly and is stable across runs
    return repr(float(v))


def write_observations(
    path: Union[str, Path, TextIO], series: Sequence[StationSeries]
) -> None:
    """Write series to the observations CSV format (canonical row order).

    One row per slot: missing slots get an empty value, null-tagged slots
    the literal ``null``. ``parse_observations`` of the output reproduces
    the input series slot for slot.
    """
    own = not hasattr(path, "write")
    fh: TextIO = open(path, "w", newline="", encoding="utf-8") if own else path
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OBS_HEADER)
        for s in sorted(series, key=lambda s: (s.station_id, s.variable.value)):
            for slot in range(len(s)):
                v = s.values[slot]
                if np.isnan(v):
                    text = "null" if slot in s.null_slots else ""
                else:
                    text = _format_value(v)
                writer.writerow(
                    [s.station_id, format_timestamp(s.slot_time(slot)), s.variable.value, text]
                )
    finally:
        if own:
            fh.close()


def detect_gaps(series: StationSeries) -> list[GapSpan]:
    """Maximal runs of missing slots, ordered by first slot."""
    missing = np.isnan(series.values)
    if not missing.any():
        return []
    edges = np.diff(np.concatenate(([0], missing.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return [
        GapSpan(int(a), int(b - a), classify_gap(int(b - a), series.cadence))
        for a, b in zip(starts, ends)
    ]


@dataclass(frozen=True)
class ValidationCell:
    """Completeness counts for one (station, variable, calendar year)."""

    station_id: str
    variable: Variable
    year: int
    expected_records: int
    present_records: int
    null_records: int
    missing_records: int
    out_of_bounds_records: int
    gap_histogram: Mapping[str, int]

    def to_dict(self) -> dict:
        return {
            "station_id": self.station_id,
            "variable": self.variable.value,
            "year": self.year,
            "expected_records": self.expected_records,
            "present_records": self.present_records,
            "null_records": self.null_records,
            "missing_records": self.missing_records,
            "out_of_bounds_records": self.out_of_bounds_records,
            "gap_histogram": dict(sorted(self.gap_histogram.items())),
        }


@dataclass(frozen=True)
class ValidationReport:
    cells: tuple[ValidationCell, ...]
    bounds: Mapping[Variable, tuple[float, float]]

    def to_dict(self) -> dict:
        return {
            "bounds": {
                var.value: [lo, hi]
                for var, (lo, hi) in sorted(self.bounds.items(), key=lambda kv: kv[0].value)
            },
            "cells": [c.to_dict() for c in self.cells],
        }

    def to_json(self) -> str:
        """Stable key ordering; bit-exact across runs for identical input."""
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _year_slot_range(series: StationSeries, year: int) -> tuple[int, int]:
    """Half-open slot range [a, b) of the series falling in calendar year."""
    year_start = datetime(year, 1, 1, tzinfo=UTC)
    year_end = datetime(year + 1, 1, 1, tzinfo=UTC)

    def ceil_slot(ts: datetime) -> int:
        delta = ts - series.start
        q, r = divmod(delta, series.cadence)
        return q + (1 if r else 0)

    a = max(0, ceil_slot(year_start))
    b = min(len(series), ceil_slot(year_end))
    return a, max(a, b)


def validate(
    series: Iterable[StationSeries],
    bounds: Optional[Mapping[Variable, tuple[float, float]]] = None,
) -> ValidationReport:
    """Count expected/present/null/missing/out-of-bounds records per year.

    Expected records per year are days covered by the series in that year
    times the records per day; out-of-bounds values (outside the inclusive
    [min, max] per variable) are reported, never removed.
    """
    bounds = dict(DEFAULT_BOUNDS if bounds is None else bounds)
    for var, (lo, hi) in bounds.items():
        if not lo < hi:
            raise ValueError(f"bounds for {var}: min must be < max")
    cells: list[ValidationCell] = []
    for s in sorted(series, key=lambda s: (s.station_id, s.variable.value)):
        day_minutes = DAY.total_seconds() / 60.0
        cad_minutes = s.cadence.total_seconds() / 60.0
        per_day = day_minutes / cad_minutes
        if per_day != int(per_day):
            raise ValueError(f"cadence {s.cadence} does not divide a day")
        per_day = int(per_day)
        lo, hi = bounds.get(s.variable, (-np.inf, np.inf))
        if len(s) == 0:
            cells.append(
                ValidationCell(s.station_id, s.variable, s.start.year, 0, 0, 0, 0, 0, {})
            )
            continue
        gaps = detect_gaps(s)
        first_year = s.start.year
        last_year = s.slot_time(len(s) - 1).year
        null_idx = np.zeros(len(s), dtype=bool)
        for i in s.null_slots:
            null_idx[i] = True
        for year in range(first_year, last_year + 1):
            a, b = _year_slot_range(s, year)
            if b <= a:
                continue
            days = (s.slot_time(b - 1).date() - s.slot_time(a).date()).days + 1
            expected = days * per_day
            chunk = s.values[a:b]
            present = int((~np.isnan(chunk)).sum())
            nulls = int(null_idx[a:b].sum())
            missing = expected - present - nulls
            finite = chunk[~np.isnan(chunk)]
            oob = int(((finite < lo) | (finite > hi)).sum())
            hist: dict[str, int] = {}
            for g in gaps:
                if a <= g.first_slot < b:
                    key = g.kind.value
                    hist[key] = hist.get(key, 0) + 1
            cells.append(
                ValidationCell(
                    s.station_id, s.variable, year,
                    expected, present, nulls, missing, oob, hist,
                )
            )
    return ValidationReport(cells=tuple(cells), bounds=bounds)
