"""In-memory model of execution traces.

A trace is an ordered sequence of records, each carrying a timestamp and a
partial assignment of signal values.  Timestamps are kept as exact rationals
(fractions.Fraction) end to end: rate classification, interpolation grids and
SMT literal emission all depend on exact comparisons, and binary floats would
drift at bracket boundaries.
"""

from __future__ import annotations

import csv
import hashlib
import io
from bisect import bisect_right
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import IO, Iterable, Mapping, Optional, Sequence, Union


class TraceError(Exception):
    """Base class for trace-model failures."""


class TraceFormatError(TraceError):
    """Malformed trace input (bad CSV, non-monotonic timestamps, ...)."""


class DomainError(TraceError):
    """A lookup outside the trace's defined domain."""


# Default tolerance for rate classification, relative to the first gap.
RATE_TOLERANCE = Fraction(1, 10**9)


def parse_rational(text: str) -> Fraction:
    """Parse decimal, scientific or p/q text into an exact rational."""
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    try:
        return Fraction(Decimal(text))
    except (InvalidOperation, ValueError) as exc:
        raise ValueError(f"not a number: {text!r}") from exc


def format_rational(value: Fraction) -> str:
    """Render a rational for interchange.

    Values with a 2^a*5^b denominator have an exact decimal form and are
    emitted that way; anything else (e.g. thirds from linear interpolation
    over a 0.7 gap) is emitted as p/q, which parse_rational accepts back.
    """
    value = Fraction(value)
    den = value.denominator
    twos = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    fives = 0
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    if digits == 0:
        return str(value.numerator)
    scaled = value.numerator * 10**digits // value.denominator
    sign = "-" if scaled < 0 else ""
    body = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{body[:-digits]}.{body[-digits:]}"


@dataclass(frozen=True)
class Fixed:
    """Fixed sample rate: consecutive gaps all equal sr (within tolerance)."""

    sr: Fraction


@dataclass(frozen=True)
class Variable:
    """Variable sample rate (also the convention for single-record traces)."""


Rate = Union[Fixed, Variable]


@dataclass(frozen=True)
class Record:
    """One trace record: position, timestamp, and a partial value map."""

    index: int
    timestamp: Fraction
    values: Mapping[str, Fraction]

    def assigned(self) -> frozenset:
        return frozenset(self.values.keys())


@dataclass(frozen=True)
class Trace:
    records: tuple
    signals: tuple
    rate: Rate
    timestamps: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ts = []
        for pos, rec in enumerate(self.records):
            if rec.index != pos:
                raise TraceFormatError(
                    f"record index {rec.index} at position {pos}: indices must be contiguous from 0"
                )
            if ts and rec.timestamp <= ts[-1]:
                raise TraceFormatError(
                    f"non-monotonic timestamp at row {pos + 1}"
                )
            ts.append(rec.timestamp)
        if not ts:
            raise TraceFormatError("empty trace")
        object.__setattr__(self, "timestamps", tuple(ts))

    def __len__(self) -> int:
        return len(self.records)

    @property
    def last_index(self) -> int:
        """m: the highest record index."""
        return len(self.records) - 1

    @property
    def t0(self) -> Fraction:
        return self.timestamps[0]

    @property
    def tm(self) -> Fraction:
        return self.timestamps[-1]

    @property
    def span(self):
        return (self.t0, self.tm)


def classify_rate(trace: Trace, tolerance: Fraction = RATE_TOLERANCE) -> Rate:
    """Fixed(sr) iff every gap equals the first gap within relative tolerance.

    sr is the first gap.  Traces with fewer than two records are Variable by
    convention.
    """
    ts = trace.timestamps
    if len(ts) < 2:
        return Variable()
    tol = Fraction(tolerance)
    sr = ts[1] - ts[0]
    for a, b in zip(ts[1:], ts[2:]):
        if abs((b - a) - sr) > tol * sr:
            return Variable()
    return Fixed(sr)


def iota_variable(trace: Trace, t: Fraction) -> int:
    """Index of the record with the highest timestamp not exceeding t.

    Defined only on the trace's span; out-of-range timestamps are a domain
    error rather than an invented extrapolation.
    """
    t = Fraction(t)
    ts = trace.timestamps
    if t < ts[0] or t > ts[-1]:
        raise DomainError(
            f"timestamp {format_rational(t)} outside trace span "
            f"[{format_rational(ts[0])}, {format_rational(ts[-1])}]"
        )
    return bisect_right(ts, t) - 1


def iota_fixed(sr: Fraction, t: Fraction) -> int:
    """floor(t / sr) for a fixed sample rate sr."""
    sr = Fraction(sr)
    t = Fraction(t)
    if sr <= 0:
        raise DomainError(f"sample rate must be positive, got {format_rational(sr)}")
    if t < 0:
        raise DomainError(f"negative timestamp {format_rational(t)}")
    return int(t / sr)  # int() of a non-negative Fraction truncates = floor


def value_at(trace: Trace, signal: str, j: int) -> Fraction:
    """pi[j].signal with range and assignment checks."""
    if j < 0 or j > trace.last_index:
        raise DomainError(f"index {j} out of range [0, {trace.last_index}]")
    rec = trace.records[j]
    try:
        return rec.values[signal]
    except KeyError:
        raise DomainError(
            f"signal {signal!r} unassigned at index {j} (preprocess the trace first)"
        ) from None


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

def load_trace(source: Union[str, bytes, IO], format: str = "csv") -> Trace:
    """Load a trace from CSV text, bytes, or a file object.

    Layout: first column `timestamp` (decimal seconds), an optional `index`
    column that must equal the row position, and one column per signal.
    Empty cells are unassigned.
    """
    if format != "csv":
        raise TraceFormatError(f"unsupported trace format {format!r}")
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise TraceFormatError("empty trace") from None
    header = [h.strip() for h in header]
    if not header or header[0] != "timestamp":
        raise TraceFormatError("first column must be 'timestamp'")
    index_col: Optional[int] = None
    signals = []
    signal_cols = []
    for col, name in enumerate(header[1:], start=1):
        if name == "index":
            if index_col is not None:
                raise TraceFormatError("duplicate 'index' column")
            index_col = col
            continue
        if not name:
            raise TraceFormatError(f"empty signal name in column {col + 1}")
        if name in signals:
            raise TraceFormatError(f"duplicate signal column {name!r}")
        signals.append(name)
        signal_cols.append((col, name))

    records = []
    prev_t: Optional[Fraction] = None
    for row_num, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise TraceFormatError(
                f"row {row_num}: expected {len(header)} cells, got {len(row)}"
            )
        try:
            t = parse_rational(row[0])
        except ValueError:
            raise TraceFormatError(
                f"row {row_num}: malformed timestamp {row[0]!r}"
            ) from None
        if prev_t is not None and t <= prev_t:
            raise TraceFormatError(f"non-monotonic timestamp at row {row_num}")
        prev_t = t
        pos = len(records)
        if index_col is not None:
            cell = row[index_col].strip()
            try:
                declared = int(cell)
            except ValueError:
                raise TraceFormatError(
                    f"row {row_num}: malformed index {cell!r}"
                ) from None
            if declared != pos:
                raise TraceFormatError(
                    f"row {row_num}: index column says {declared}, expected {pos}"
                )
        values = {}
        for col, name in signal_cols:
            cell = row[col].strip()
            if not cell:
                continue
            try:
                values[name] = parse_rational(cell)
            except ValueError:
                raise TraceFormatError(
                    f"row {row_num}: malformed value {cell!r} for signal {name!r}"
                ) from None
        records.append(Record(index=pos, timestamp=t, values=values))

    if not records:
        raise TraceFormatError("empty trace")
    trace = Trace(records=tuple(records), signals=tuple(signals), rate=Variable())
    return Trace(records=trace.records, signals=trace.signals, rate=classify_rate(trace))


def load_trace_file(path: str) -> Trace:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return load_trace(fh)


def serialize_trace(trace: Trace) -> str:
    """Render a trace back to CSV; exact inverse of load_trace for our output."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["timestamp"] + list(trace.signals))
    for rec in trace.records:
        row = [format_rational(rec.timestamp)]
        for s in trace.signals:
            row.append(format_rational(rec.values[s]) if s in rec.values else "")
        writer.writerow(row)
    return out.getvalue()


def trace_digest(trace: Trace) -> str:
    """Stable short digest of the numeric content, for script headers."""
    return hashlib.sha256(serialize_trace(trace).encode("utf-8")).hexdigest()[:12]
