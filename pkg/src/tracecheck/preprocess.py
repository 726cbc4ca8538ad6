"""Trace preprocessing: record filtering and the two totalization strategies.

A1 fills unassigned cells in place (sample rate untouched); A2 resamples the
whole trace onto a fixed grid whose step is the minimum observed gap.  Both
rely on per-signal interpolation, configured per signal name with a default.

All arithmetic is exact.  The cubic kind is a monotone-preserving piecewise
cubic Hermite (Fritsch-Carlson slopes, three-point edge rule) implemented
over rationals so that resampled traces stay exactly on grid.
"""

from __future__ import annotations

import enum
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

from .trace import Fixed, Rate, Record, Trace, classify_rate, format_rational


class PreprocessError(Exception):
    pass


class InterpolationKind(enum.Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    CUBIC = "cubic"

    @classmethod
    def parse(cls, text: str) -> "InterpolationKind":
        word = text.strip().lower()
        if word in ("constant", "piecewise-constant", "hold"):
            return cls.CONSTANT
        if word == "linear":
            return cls.LINEAR
        if word == "cubic":
            return cls.CUBIC
        raise PreprocessError(f"unknown interpolation kind {text!r}")


DEFAULT_KIND = InterpolationKind.LINEAR

# Grids tighter than this are almost certainly a data bug, not a sample rate.
SR_FLOOR = Fraction(1, 10**9)


@dataclass
class PreprocessConfig:
    strategy: str = "A2"
    default_kind: InterpolationKind = DEFAULT_KIND
    per_signal: Dict[str, InterpolationKind] = field(default_factory=dict)

    def kind_for(self, signal: str) -> InterpolationKind:
        return self.per_signal.get(signal, self.default_kind)


def parse_keyvalues(text: str) -> Dict[str, str]:
    """Parse 'key = value' lines; '#' starts a comment; blanks ignored."""
    out: Dict[str, str] = {}
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PreprocessError(f"config line {num}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def config_from_keys(keys: Dict[str, str]) -> PreprocessConfig:
    """Build a PreprocessConfig from parsed key/values.

    Recognized: `strategy = A1|A2`, `default = constant|linear|cubic`, and
    `<signal> = <kind>` for any other undotted key.  Dotted keys (solver.cmd
    and friends) belong to other layers and are skipped here.
    """
    cfg = PreprocessConfig()
    for key, value in keys.items():
        if "." in key:
            continue
        if key == "strategy":
            strat = value.upper()
            if strat not in ("A1", "A2"):
                raise PreprocessError(f"strategy must be A1 or A2, got {value!r}")
            cfg.strategy = strat
        elif key == "default":
            cfg.default_kind = InterpolationKind.parse(value)
        else:
            cfg.per_signal[key] = InterpolationKind.parse(value)
    return cfg


# ---------------------------------------------------------------------------
# Interpolation
# ---------------------------------------------------------------------------

def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def _pchip_slopes(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> List[Fraction]:
    """Fritsch-Carlson monotone slopes with the standard three-point edge rule."""
    n = len(xs)
    h = [xs[i + 1] - xs[i] for i in range(n - 1)]
    d = [(ys[i + 1] - ys[i]) / h[i] for i in range(n - 1)]
    if n == 2:
        return [d[0], d[0]]

    slopes: List[Fraction] = [Fraction(0)] * n
    for k in range(1, n - 1):
        if d[k - 1] == 0 or d[k] == 0 or _sign(d[k - 1]) != _sign(d[k]):
            slopes[k] = Fraction(0)
        else:
            w1 = 2 * h[k] + h[k - 1]
            w2 = h[k] + 2 * h[k - 1]
            slopes[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k])

    def edge(h0: Fraction, h1: Fraction, d0: Fraction, d1: Fraction) -> Fraction:
        m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1)
        if _sign(m) != _sign(d0):
            return Fraction(0)
        if _sign(d0) != _sign(d1) and abs(m) > 3 * abs(d0):
            return 3 * d0
        return m

    slopes[0] = edge(h[0], h[1], d[0], d[1])
    slopes[-1] = edge(h[-1], h[-2], d[-1], d[-2])
    return slopes


class Interpolant:
    """A signal's interpolation function, built once and evaluated many times."""

    def __init__(self, kind: InterpolationKind, samples: Sequence[Tuple[Fraction, Fraction]]):
        if not samples:
            raise PreprocessError("interpolation needs at least one sample")
        xs = [Fraction(x) for x, _ in samples]
        for a, b in zip(xs, xs[1:]):
            if b <= a:
                raise PreprocessError("interpolation samples must be strictly increasing in time")
        self.kind = kind
        self.xs = xs
        self.ys = [Fraction(y) for _, y in samples]
        self._slopes: List[Fraction] = []
        if kind is InterpolationKind.CUBIC and len(xs) >= 2:
            self._slopes = _pchip_slopes(self.xs, self.ys)

    def at(self, t: Fraction) -> Fraction:
        t = Fraction(t)
        xs, ys = self.xs, self.ys
        # Boundary rule: clamp to the nearest sample, for every kind.
        if t <= xs[0]:
            return ys[0]
        if t >= xs[-1]:
            return ys[-1]
        i = bisect_right(xs, t) - 1
        if t == xs[i]:
            return ys[i]
        if self.kind is InterpolationKind.CONSTANT:
            return ys[i]
        if self.kind is InterpolationKind.LINEAR or len(xs) == 2:
            frac = (t - xs[i]) / (xs[i + 1] - xs[i])
            return ys[i] + (ys[i + 1] - ys[i]) * frac
        # Cubic Hermite on the bracketing interval.
        h = xs[i + 1] - xs[i]
        s = t - xs[i]
        dk = (ys[i + 1] - ys[i]) / h
        m0, m1 = self._slopes[i], self._slopes[i + 1]
        c2 = (3 * dk - 2 * m0 - m1) / h
        c3 = (m0 + m1 - 2 * dk) / (h * h)
        return ys[i] + s * (m0 + s * (c2 + s * c3))


def interpolate(
    kind: InterpolationKind,
    samples: Sequence[Tuple[Fraction, Fraction]],
    t: Fraction,
) -> Fraction:
    return Interpolant(kind, samples).at(t)


# ---------------------------------------------------------------------------
# Filtering and the two strategies
# ---------------------------------------------------------------------------

def filter_unused(trace: Trace, used: Iterable[str]) -> Trace:
    """Drop records that assign nothing a property cares about.

    Remaining records are re-indexed from 0 and restricted to the used
    signal columns.
    """
    used_set = set(used)
    unknown = used_set - set(trace.signals)
    if unknown:
        raise PreprocessError(
            "signals not in trace: " + ", ".join(sorted(unknown))
        )
    kept = []
    for rec in trace.records:
        values = {s: v for s, v in rec.values.items() if s in used_set}
        if values:
            kept.append((rec.timestamp, values))
    if not kept:
        raise PreprocessError("no relevant records")
    records = tuple(
        Record(index=i, timestamp=t, values=v) for i, (t, v) in enumerate(kept)
    )
    signals = tuple(s for s in trace.signals if s in used_set)
    out = Trace(records=records, signals=signals, rate=trace.rate)
    return Trace(records=out.records, signals=out.signals, rate=classify_rate(out))


def _interpolants(trace: Trace, cfg: PreprocessConfig) -> Dict[str, Interpolant]:
    table = {}
    for s in trace.signals:
        samples = [
            (rec.timestamp, rec.values[s]) for rec in trace.records if s in rec.values
        ]
        if not samples:
            raise PreprocessError(f"signal {s!r} has no assigned samples")
        table[s] = Interpolant(cfg.kind_for(s), samples)
    return table


def apply_a1(trace: Trace, cfg: PreprocessConfig) -> Trace:
    """Fill unassigned cells in place; timestamps and assigned values untouched."""
    table = _interpolants(trace, cfg)
    records = []
    for rec in trace.records:
        values = dict(rec.values)
        for s in trace.signals:
            if s not in values:
                values[s] = table[s].at(rec.timestamp)
        records.append(Record(index=rec.index, timestamp=rec.timestamp, values=values))
    return Trace(records=tuple(records), signals=trace.signals, rate=trace.rate)


def apply_a2(trace: Trace, cfg: PreprocessConfig, sr_floor: Fraction = SR_FLOOR) -> Trace:
    """Resample onto the fixed grid t_0, t_0+sr, ... with sr = minimum gap.

    The last grid point is the largest one not exceeding t_m; an off-grid t_m
    is dropped so the output rate is exactly fixed.
    """
    if len(trace) < 2:
        raise PreprocessError("strategy A2 needs at least 2 records")
    ts = trace.timestamps
    sr = min(b - a for a, b in zip(ts, ts[1:]))
    if sr < sr_floor:
        raise PreprocessError(
            f"degenerate sample rate {format_rational(sr)} (minimum gap below floor)"
        )
    table = _interpolants(trace, cfg)
    steps = int((ts[-1] - ts[0]) / sr)  # floor: largest k with t_0 + k*sr <= t_m
    records = []
    for k in range(steps + 1):
        t = ts[0] + k * sr
        values = {s: table[s].at(t) for s in trace.signals}
        records.append(Record(index=k, timestamp=t, values=values))
    return Trace(records=tuple(records), signals=trace.signals, rate=Fixed(sr))
