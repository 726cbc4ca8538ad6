"""
Deciding a property by direct evaluation
========================================

The direct route enumerates quantifiers over the trace itself: index
variables walk the records, and time variables only need finitely many
sample points because the trace is piecewise constant between records.
It answers satisfied / violated, or inconclusive when the property falls
outside the fragment it can decide exactly.
"""

from tracecheck import load_trace
from tracecheck.semantics import check_direct
from tracecheck.syntax import parse

CSV = """\
timestamp,ang-rate,mode
0,20.1,0
0.2,22.2,1
0.9,23.3,0
1.8,20.4,0
3.0,21.1,3
4.9,3.2,3
5.7,1.1,3
"""

trace = load_trace(CSV)
sig = trace.signals

# The mode switches 0 -> 3 between indices 3 and 4 (timestamps 1.8 and
# 3.0); the rate falls to 1.1 at t=5.7, within ten seconds of t=1.8.
r1 = parse(
    "forall sigma0 in [0,5] such that "
    "((mode @i sigma0) = 0 and (mode @i (sigma0 + 1)) = 3) implies "
    "exists tau0 in [0,10] such that (ang-rate @t (tau0 + i2t(sigma0))) < 1.5",
    sig,
)
print("R1:", check_direct(trace, r1).verdict.value)

# Indices 3..5 hold 20.4, 21.1 and 3.2, so no reading is below 2.5.
small = parse("exists sigma0 in [3,5] such that (ang-rate @i sigma0) < 2.5", sig)
print("existence check:", check_direct(trace, small).verdict.value)

# A quantifier over an empty slice of the trace cannot be decided from
# the recorded data; the answer is honest rather than vacuous.
empty = parse("exists sigma0 in [7,9] such that (ang-rate @i sigma0) < 2.5", sig)
res = check_direct(trace, empty)
print("empty range:", res.verdict.value, "--", res.reason)

# Unbounded real quantification is outside the direct fragment.
rho = parse("exists rho0 such that rho0 > 1000", sig)
res = check_direct(trace, rho)
print("unbounded real:", res.verdict.value, "--", res.reason)
