"""
Running a solver and mapping outcomes to verdicts
=================================================

Any executable that takes an SMT-LIB file and prints sat / unsat /
unknown works as a solver.  The bundled `tracecheck-solve` evaluates the
scripts this toolkit emits; point --solver at z3 or cvc5 if you have
them.  Because the script encodes the negated property, the mapping is:
unsat -> satisfied, sat -> violated, unknown -> unknown, and timeouts or
resource exhaustion -> inconclusive.
"""

import tempfile
from pathlib import Path

from tracecheck import load_trace
from tracecheck.smt import translate
from tracecheck.solver import run_solver, verdict_of
from tracecheck.syntax import parse

CSV = """\
timestamp,spd
0,1.0
0.3,2.0
0.7,0.4
1.5,0.2
"""

trace = load_trace(CSV)

work = Path(tempfile.mkdtemp(prefix="demo-solve-"))
for text in (
    "exists tau0 in [0, 1.5] such that (spd @t tau0) < 0.5",   # holds: 0.4 at 0.7
    "forall sigma0 in [0, 3] such that (spd @i sigma0) > 0.5", # fails at index 2
):
    f = parse(text, trace.signals)
    path = work / "query.smt2"
    path.write_text(translate(trace, f).text)
    outcome = run_solver(str(path), cmd="tracecheck-solve", timeout_s=60, mem_mb=512)
    verdict, reason = verdict_of(outcome)
    print(f"{text}\n  -> {outcome.status} in {outcome.elapsed_s:.3f}s -> {verdict.value} {reason}")
    if outcome.model:
        print("  witness model:", outcome.model.splitlines()[0])
