"""End-to-end check pipeline: load, preprocess, translate, solve, report.

This is the engine behind the command-line interface.  Stages run in a
fixed order (load inputs, drop unused records, resample, pick the index
map, translate the negated property, call the solver) and every failure
before the solver carries a stage tag, so callers can print
"error at <stage>: ..." and exit with a code distinct from the four
verdicts.  Solver trouble is not a stage error: outcomes map onto
verdicts through solver.verdict_of.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from .preprocess import (
    PreprocessConfig,
    PreprocessError,
    apply_a1,
    apply_a2,
    config_from_keys,
    filter_unused,
    parse_keyvalues,
)
from .semantics import check_direct
from .smt import DEFAULT_EXPANSION_CAP, SmtScript, TranslateError, choose_iota_mode, translate
from .solver import (
    DEFAULT_MEM_MB,
    DEFAULT_SOLVER_CMD,
    DEFAULT_TIMEOUT_S,
    Verdict,
    run_solver,
    verdict_of,
)
from .syntax import Formula, ParseError, load_property, signals_of
from .trace import Trace, TraceError, load_trace_file


class StageError(Exception):
    """A pipeline stage failed before any verdict could be reached."""

    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage
        self.message = message

    def tagged(self) -> str:
        return f"{self.stage}: {self.message}"


@dataclass
class CheckOptions:
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    iota: str = "auto"
    solver_cmd: str = DEFAULT_SOLVER_CMD
    timeout_s: float = DEFAULT_TIMEOUT_S
    mem_mb: int = DEFAULT_MEM_MB
    oracle: bool = False
    cap: int = DEFAULT_EXPANSION_CAP


@dataclass
class TimingStats:
    runs: int
    avg_s: float
    min_s: float
    max_s: float
    sd_s: float


@dataclass
class ReportRow:
    id: str
    verdict: str
    reason: str = ""
    solver_status: str = ""
    time_s: float = 0.0
    records_raw: int = 0
    records_filtered: int = 0
    records_pre: int = 0
    iota: str = ""
    script: str = ""
    oracle_verdict: str = ""
    oracle_reason: str = ""
    timing: Optional[TimingStats] = None


EXIT_BY_VERDICT = {
    "satisfied": 0,
    "violated": 1,
    "unknown": 2,
    "inconclusive": 3,
}
EXIT_STAGE_ERROR = 4


def slug(name: str) -> str:
    """A filesystem-safe rendering of an entry id or file stem."""
    return "".join(c if c.isalnum() or c in "-._" else "_" for c in name) or "entry"


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def load_inputs(trace_path: Union[str, Path], property_path: Union[str, Path]):
    """Read and parse both files; returns (trace, formula)."""
    try:
        trace = load_trace_file(str(trace_path))
    except OSError as exc:
        raise StageError("io-error", f"{trace_path}: {exc.strerror or exc}")
    except TraceError as exc:
        raise StageError("trace-format", f"{trace_path}: {exc}")
    try:
        text = Path(property_path).read_text()
    except OSError as exc:
        raise StageError("io-error", f"{property_path}: {exc.strerror or exc}")
    try:
        formula, _, _ = load_property(text, trace.signals)
    except ParseError as exc:
        raise StageError("property-parse", f"{property_path}: {exc}")
    missing = signals_of(formula) - set(trace.signals)
    if missing:
        raise StageError(
            "signature",
            "property uses signals absent from the trace: " + ", ".join(sorted(missing)),
        )
    return trace, formula


def preprocess_for(trace: Trace, formula: Formula, cfg: PreprocessConfig):
    """Drop records the property never reads, then resample.

    A property with no signal reads (pure time/index arithmetic) keeps the
    whole trace: its timestamps still drive i2t/t2i.
    Returns (filtered, preprocessed).
    """
    used = signals_of(formula)
    try:
        filtered = filter_unused(trace, used) if used else trace
        if cfg.strategy == "A1":
            pre = apply_a1(filtered, cfg)
        else:
            pre = apply_a2(filtered, cfg)
    except (PreprocessError, TraceError) as exc:
        raise StageError("preprocess", str(exc))
    return filtered, pre


def build_script(pre: Trace, formula: Formula, options: CheckOptions) -> SmtScript:
    try:
        mode = choose_iota_mode(pre, options.iota)
    except TranslateError as exc:
        raise StageError("iota", str(exc))
    try:
        return translate(pre, formula, mode=mode, cap=options.cap)
    except TranslateError as exc:
        raise StageError("translate", str(exc))


def check_pair(
    trace_path: Union[str, Path],
    property_path: Union[str, Path],
    options: CheckOptions,
    script_path: Union[str, Path],
    row_id: str = "",
) -> ReportRow:
    """Run the whole pipeline for one trace/property pair."""
    started = time.perf_counter()
    trace, formula = load_inputs(trace_path, property_path)
    filtered, pre = preprocess_for(trace, formula, options.preprocess)
    script = build_script(pre, formula, options)
    script_path = Path(script_path)
    try:
        script_path.parent.mkdir(parents=True, exist_ok=True)
        script_path.write_text(script.text)
    except OSError as exc:
        raise StageError("io-error", f"{script_path}: {exc.strerror or exc}")
    outcome = run_solver(
        str(script_path), options.solver_cmd, options.timeout_s, options.mem_mb
    )
    verdict, reason = verdict_of(outcome)
    row = ReportRow(
        id=row_id or f"{Path(property_path).stem}__{Path(trace_path).stem}",
        verdict=verdict.value,
        reason=reason,
        solver_status=outcome.status,
        records_raw=len(trace),
        records_filtered=len(filtered),
        records_pre=len(pre),
        iota=script.iota_mode.describe(),
        script=str(script_path),
    )
    if options.oracle:
        direct = check_direct(pre, formula)
        row.oracle_verdict = direct.verdict.value
        row.oracle_reason = direct.reason
        definitive = (Verdict.SATISFIED, Verdict.VIOLATED)
        if (
            verdict in definitive
            and direct.verdict in definitive
            and verdict != direct.verdict
        ):
            raise StageError(
                "cross-check",
                f"solver path says {verdict.value} but direct evaluation "
                f"says {direct.verdict.value} (script: {script_path})",
            )
    row.time_s = round(time.perf_counter() - started, 3)
    return row


# ---------------------------------------------------------------------------
# Configuration overlays
# ---------------------------------------------------------------------------

_SOLVER_KEYS = ("solver.cmd", "solver.timeout_s", "solver.mem_mb")


def apply_config_keys(options: CheckOptions, keys: Dict[str, str]) -> CheckOptions:
    """Overlay parsed key=value settings; keys left unset keep prior values."""
    for key in keys:
        if "." in key and key not in _SOLVER_KEYS:
            raise PreprocessError(f"unknown config key {key!r}")
    cfg = config_from_keys(keys)
    pre = options.preprocess
    pre = replace(
        pre,
        strategy=cfg.strategy if "strategy" in keys else pre.strategy,
        default_kind=cfg.default_kind if "default" in keys else pre.default_kind,
        per_signal={**pre.per_signal, **cfg.per_signal},
    )
    out = replace(options, preprocess=pre)
    if "solver.cmd" in keys:
        out = replace(out, solver_cmd=keys["solver.cmd"])
    if "solver.timeout_s" in keys:
        try:
            out = replace(out, timeout_s=float(keys["solver.timeout_s"]))
        except ValueError:
            raise PreprocessError(
                f"solver.timeout_s must be a number, got {keys['solver.timeout_s']!r}"
            )
    if "solver.mem_mb" in keys:
        try:
            out = replace(out, mem_mb=int(keys["solver.mem_mb"]))
        except ValueError:
            raise PreprocessError(
                f"solver.mem_mb must be an integer, got {keys['solver.mem_mb']!r}"
            )
    return out


def load_config_file(options: CheckOptions, path: Union[str, Path]) -> CheckOptions:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StageError("io-error", f"{path}: {exc.strerror or exc}")
    try:
        return apply_config_keys(options, parse_keyvalues(text))
    except PreprocessError as exc:
        raise StageError("config", f"{path}: {exc}")


# ---------------------------------------------------------------------------
# Batch manifests
# ---------------------------------------------------------------------------

MANIFEST_FIELDS = ("id", "trace", "property", "strategy", "config")


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    trace: str
    property: str
    strategy: str = ""
    config: str = ""


def _resolve(base: Path, cell: str) -> str:
    p = Path(cell)
    return str(p if p.is_absolute() else base / p)


def load_manifest(path: Union[str, Path]) -> List[ManifestEntry]:
    """Parse a batch manifest CSV with header id,trace,property,strategy,config."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StageError("io-error", f"{path}: {exc.strerror or exc}")
    reader = csv.DictReader(io.StringIO(text))
    header = [f.strip() for f in reader.fieldnames or []]
    if header != list(MANIFEST_FIELDS):
        raise StageError(
            "manifest",
            f"{path}: header must be {','.join(MANIFEST_FIELDS)},"
            f" got {','.join(header) or '(empty file)'}",
        )
    base = Path(path).parent
    entries: List[ManifestEntry] = []
    seen: set = set()
    for num, rec in enumerate(reader, start=2):
        if rec.get(None):
            raise StageError("manifest", f"{path} line {num}: too many columns")
        cells = {k: (rec.get(k) or "").strip() for k in MANIFEST_FIELDS}
        if not cells["id"]:
            raise StageError("manifest", f"{path} line {num}: empty id")
        if cells["id"] in seen:
            raise StageError("manifest", f"{path} line {num}: duplicate id {cells['id']!r}")
        seen.add(cells["id"])
        if not cells["trace"] or not cells["property"]:
            raise StageError("manifest", f"{path} line {num}: trace and property are required")
        strategy = cells["strategy"].upper()
        if strategy not in ("", "A1", "A2"):
            raise StageError(
                "manifest", f"{path} line {num}: strategy must be A1 or A2, got {cells['strategy']!r}"
            )
        entries.append(
            ManifestEntry(
                id=cells["id"],
                trace=_resolve(base, cells["trace"]),
                property=_resolve(base, cells["property"]),
                strategy=strategy,
                config=_resolve(base, cells["config"]) if cells["config"] else "",
            )
        )
    return entries


def entry_options(entry: ManifestEntry, base_options: CheckOptions) -> CheckOptions:
    """Per-entry options: the entry's config file and strategy cell win."""
    opts = replace(
        base_options,
        preprocess=replace(
            base_options.preprocess,
            per_signal=dict(base_options.preprocess.per_signal),
        ),
    )
    if entry.config:
        opts = load_config_file(opts, entry.config)
    if entry.strategy:
        opts = replace(opts, preprocess=replace(opts.preprocess, strategy=entry.strategy))
    return opts


def run_batch(
    manifest_path: Union[str, Path],
    base_options: CheckOptions,
    out_dir: Union[str, Path],
    jobs: int = 1,
    repeat: int = 1,
) -> List[ReportRow]:
    """Run every manifest entry, isolating per-entry failures.

    Rows come back sorted by entry id regardless of completion order, so
    reports are deterministic under any parallelism.
    """
    entries = load_manifest(manifest_path)
    scripts_dir = Path(out_dir) / "scripts"
    runs = max(1, repeat)

    def run_entry(entry: ManifestEntry) -> ReportRow:
        script_path = scripts_dir / f"{slug(entry.id)}.smt2"
        try:
            opts = entry_options(entry, base_options)
            rows = [
                check_pair(entry.trace, entry.property, opts, script_path, row_id=entry.id)
                for _ in range(runs)
            ]
        except StageError as exc:
            return ReportRow(id=entry.id, verdict="inconclusive", reason=exc.tagged())
        except Exception as exc:  # isolation: one broken entry must not sink the batch
            return ReportRow(id=entry.id, verdict="inconclusive", reason=f"internal: {exc!r}")
        row = rows[-1]
        verdicts = {r.verdict for r in rows}
        if len(verdicts) > 1:
            note = "verdict varied across repeats: " + ",".join(sorted(verdicts))
            row.reason = f"{row.reason}; {note}" if row.reason else note
        if runs > 1:
            times = [r.time_s for r in rows]
            row.timing = TimingStats(
                runs=runs,
                avg_s=round(statistics.fmean(times), 3),
                min_s=min(times),
                max_s=max(times),
                sd_s=round(statistics.stdev(times), 3),
            )
        return row

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        rows = list(pool.map(run_entry, entries))
    rows.sort(key=lambda r: r.id)
    return rows


def batch_exit_code(rows: Sequence[ReportRow]) -> int:
    """Worst entry wins."""
    return max((EXIT_BY_VERDICT[r.verdict] for r in rows), default=0)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

BASE_COLUMNS = (
    "id",
    "verdict",
    "reason",
    "solver_status",
    "time_s",
    "records_raw",
    "records_filtered",
    "records_pre",
    "iota",
    "script",
    "oracle_verdict",
    "oracle_reason",
)
STAT_COLUMNS = ("time_avg_s", "time_min_s", "time_max_s", "time_sd_s")


def row_dict(row: ReportRow) -> Dict[str, object]:
    d: Dict[str, object] = {col: getattr(row, col) for col in BASE_COLUMNS}
    if row.timing is not None:
        d["time_avg_s"] = row.timing.avg_s
        d["time_min_s"] = row.timing.min_s
        d["time_max_s"] = row.timing.max_s
        d["time_sd_s"] = row.timing.sd_s
    return d


def write_report(rows: Sequence[ReportRow], fmt: str, path: Union[str, Path]) -> None:
    dicts = [row_dict(r) for r in rows]
    if fmt == "csv":
        columns = list(BASE_COLUMNS)
        if any(r.timing is not None for r in rows):
            columns += list(STAT_COLUMNS)
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns, restval="")
            writer.writeheader()
            for d in dicts:
                writer.writerow(d)
    elif fmt == "jsonl":
        with open(path, "w") as fh:
            for d in dicts:
                fh.write(json.dumps(d) + "\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
