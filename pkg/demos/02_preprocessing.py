"""
Preprocessing: filling holes in place (A1) or resampling to a grid (A2)
=======================================================================

Recorded traces rarely come clean: rows miss values and timestamps are
unevenly spaced.  Strategy A1 fills unassigned cells by interpolation
while keeping the original timestamps.  Strategy A2 resamples everything
onto a fixed grid whose step is the smallest observed gap, which also
makes the fast fixed-rate index map available to the translator.
"""

from tracecheck import load_trace, serialize_trace
from tracecheck.preprocess import InterpolationKind, PreprocessConfig, apply_a1, apply_a2

CSV = """\
timestamp,spd,thrust
0,1.0,
0.5,,8
1.0,2.0,6
2.5,5.0,
3.0,,2
"""

trace = load_trace(CSV)
print("raw:", [(str(r.timestamp), dict((k, str(v)) for k, v in r.values.items())) for r in trace.records])

# A1: same five timestamps, every cell now has a value.
a1 = apply_a1(trace, PreprocessConfig(strategy="A1"))
print("\nA1 output:")
print(serialize_trace(a1))

# A2: the smallest gap is 0.5, so the grid runs 0, 0.5, ..., 3.0.
a2 = apply_a2(trace, PreprocessConfig())
print("A2 output (note the fixed rate):")
print(serialize_trace(a2))
print("rate:", a2.rate)

# Interpolation is per signal: hold the previous value for a discrete
# signal, fit a monotone cubic through a smooth one.
cfg = PreprocessConfig(
    per_signal={"thrust": InterpolationKind.CONSTANT, "spd": InterpolationKind.CUBIC}
)
print("per-signal kinds:")
print(serialize_trace(apply_a2(trace, cfg)))
