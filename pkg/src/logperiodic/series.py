"""Time series container, CSV ingestion, and windowing.

Time is measured in real-valued days since 1970-01-01 (UTC).  Calendar
dates map onto whole-day offsets; weekend gaps are simply absent
observations.  Positivity of prices is enforced at the ingestion boundary
(:func:`parse_csv`), not on the container itself, because transformed
series (e.g. log prices) legitimately carry non-positive values.
"""

from __future__ import annotations

import csv
import datetime
import io
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, TextIO

import numpy as np

from .errors import (
    DomainError,
    DuplicateTimestampError,
    EmptyInputError,
    FormatError,
    InsufficientDataError,
)

EPOCH = datetime.date(1970, 1, 1)


def day_offset(d: datetime.date) -> float:
    """Whole-day offset of a calendar date (midnight UTC)."""
    return float((d - EPOCH).days)


def offset_date(t: float) -> datetime.date:
    """Calendar date containing the instant at day offset ``t``."""
    if not math.isfinite(t):
        raise ValueError(f"day offset must be finite, got {t}")
    return EPOCH + datetime.timedelta(days=math.floor(t))


def parse_time(text: str) -> float:
    """Parse a day offset from an ISO-8601 date or a bare number."""
    text = text.strip()
    try:
        return day_offset(datetime.date.fromisoformat(text))
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"cannot parse {text!r} as a date or day offset") from None
    if not math.isfinite(value):
        raise FormatError(f"day offset must be finite, got {text!r}")
    return value


class TimePoint(NamedTuple):
    """One observation: day offset and (strictly positive) price level."""

    t: float
    value: float


@dataclass(frozen=True)
class Window:
    """Closed time interval [t_start, t_end] in day offsets."""

    t_start: float
    t_end: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise ValueError("window bounds must be finite")
        if not self.t_start < self.t_end:
            raise ValueError(
                f"window start {self.t_start} must precede end {self.t_end}"
            )

    @property
    def span(self) -> float:
        return self.t_end - self.t_start

    def contains(self, t: float) -> bool:
        return self.t_start <= t <= self.t_end


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered (time, value) observations on the real-valued day axis.

    Invariants checked at construction: at least two points, finite values,
    strictly increasing times.  The backing arrays are copied and marked
    read-only, so instances are immutable and safe to share across threads.
    """

    t: np.ndarray
    value: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        t = np.array(self.t, dtype=float)
        value = np.array(self.value, dtype=float)
        if t.ndim != 1 or value.ndim != 1 or t.shape != value.shape:
            raise ValueError("t and value must be 1-d arrays of equal length")
        if t.size < 2:
            raise InsufficientDataError(f"need at least 2 points, got {t.size}")
        if not np.all(np.isfinite(t)):
            raise ValueError("time axis contains non-finite entries")
        if not np.all(np.isfinite(value)):
            raise ValueError("values contain non-finite entries")
        diffs = np.diff(t)
        if np.any(diffs == 0):
            i = int(np.argmax(diffs == 0))
            raise DuplicateTimestampError(f"duplicate time at index {i + 1} (t={float(t[i + 1])!r})")
        if np.any(diffs < 0):
            i = int(np.argmax(diffs < 0))
            raise ValueError(f"time axis must be increasing; order breaks at index {i + 1}")
        t.setflags(write=False)
        value.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "value", value)

    def __len__(self) -> int:
        return int(self.t.size)

    def __iter__(self) -> Iterator[TimePoint]:
        for ti, vi in zip(self.t, self.value):
            yield TimePoint(float(ti), float(vi))

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def span(self) -> float:
        return self.t_end - self.t_start

    def slice(self, window: Window) -> "TimeSeries":
        """All points with t_start <= t <= t_end, order and label preserved."""
        mask = (self.t >= window.t_start) & (self.t <= window.t_end)
        if int(mask.sum()) < 2:
            raise InsufficientDataError(
                f"window [{window.t_start}, {window.t_end}] keeps "
                f"{int(mask.sum())} of {len(self)} points; need at least 2"
            )
        return TimeSeries(self.t[mask], self.value[mask], self.label)


def log_transform(series: TimeSeries) -> TimeSeries:
    """Replace each value by its natural logarithm; times unchanged."""
    if np.any(series.value <= 0):
        bad = float(series.value[series.value <= 0][0])
        raise DomainError(f"log transform requires positive values, found {bad}")
    return TimeSeries(series.t, np.log(series.value), series.label)


class ParseResult(NamedTuple):
    """Outcome of CSV ingestion: the series plus the count of skipped rows."""

    series: TimeSeries
    skipped: int


def parse_csv(source: str | TextIO, value_column: str = "close") -> ParseResult:
    """Load a time series from CSV text.

    The stream must carry a header row with a ``date`` column (ISO-8601)
    and the chosen value column.  Rows whose value is missing or
    non-numeric are skipped and counted; non-positive prices are rejected
    outright.  The result is sorted by time.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty input: no header row") from None
    names = [h.strip() for h in header]
    if "date" not in names:
        raise FormatError(f"header {names!r} has no 'date' column")
    if value_column not in names:
        raise FormatError(f"header {names!r} has no {value_column!r} column")
    date_idx = names.index("date")
    value_idx = names.index(value_column)

    rows: list[tuple[float, float, str]] = []
    skipped = 0
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) <= date_idx or not row[date_idx].strip():
            raise FormatError(f"line {lineno}: missing date field")
        raw_date = row[date_idx].strip()
        try:
            day = datetime.date.fromisoformat(raw_date)
        except ValueError:
            raise FormatError(f"line {lineno}: bad date {raw_date!r}") from None
        if len(row) <= value_idx:
            skipped += 1
            continue
        raw_value = row[value_idx].strip()
        try:
            value = float(raw_value)
        except ValueError:
            skipped += 1
            continue
        if not math.isfinite(value):
            skipped += 1
            continue
        if value <= 0:
            raise FormatError(
                f"line {lineno}: non-positive price {value} on {raw_date}"
            )
        rows.append((day_offset(day), value, raw_date))

    if not rows:
        raise EmptyInputError("no usable rows in input")
    rows.sort(key=lambda r: r[0])
    for (t0, _, d0), (t1, _, _) in zip(rows, rows[1:]):
        if t0 == t1:
            raise DuplicateTimestampError(f"duplicate date {d0}")
    if len(rows) < 2:
        raise InsufficientDataError("need at least 2 usable rows")
    t = np.array([r[0] for r in rows])
    value = np.array([r[1] for r in rows])
    return ParseResult(TimeSeries(t, value, value_column), skipped)
