"""
Batch experiments over a manifest
=================================

A manifest is a CSV listing trace/property pairs, one check per row.
Rows can override the preprocessing strategy and point at a config file;
failures stay contained in their own row.  The same thing is available
from the shell as `tracecheck batch manifest.csv --report csv`.
"""

import tempfile
from pathlib import Path

from tracecheck.pipeline import CheckOptions, run_batch, write_report

work = Path(tempfile.mkdtemp(prefix="demo-batch-"))

(work / "cruise.csv").write_text(
    "timestamp,spd\n0,12\n0.5,14\n1.0,15.2\n1.5,15.1\n2.0,14.9\n2.5,15.0\n"
)
(work / "hold.prop").write_text(
    "forall tau0 in [1.0, 2.5] such that (spd @t tau0) > 14.5\n"
)
(work / "overshoot.prop").write_text(
    "exists tau0 in [0, 2.5] such that (spd @t tau0) > 16\n"
)
(work / "smooth.cfg").write_text("default = cubic\n")

(work / "manifest.csv").write_text(
    "id,trace,property,strategy,config\n"
    "hold-a2,cruise.csv,hold.prop,,\n"
    "hold-a1,cruise.csv,hold.prop,A1,\n"
    "hold-cubic,cruise.csv,hold.prop,,smooth.cfg\n"
    "overshoot,cruise.csv,overshoot.prop,,\n"
    "broken,missing.csv,hold.prop,,\n"
)

rows = run_batch(work / "manifest.csv", CheckOptions(), work / "out", jobs=2)
for row in rows:
    print(f"{row.id:12s} {row.verdict:13s} {row.reason}")

write_report(rows, "csv", work / "report.csv")
print("\nreport written to", work / "report.csv")
print((work / "report.csv").read_text().splitlines()[0])
