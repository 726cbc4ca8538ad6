"""External SMT solver invocation and verdict mapping.

A property holds on a trace exactly when the script encoding the negated
property together with the trace assertions is unsatisfiable, so `unsat`
maps to satisfied and `sat` to violated.  The solver runs as a subprocess
under a wall-clock timeout and an address-space cap; timeouts and resource
exhaustion are reported as inconclusive rather than as answers.
"""

from __future__ import annotations

import enum
import os
import resource
import shlex
import signal
import subprocess
import time
from dataclasses import dataclass


class Verdict(enum.Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    UNKNOWN = "unknown"
    INCONCLUSIVE = "inconclusive"


DEFAULT_SOLVER_CMD = "tracecheck-solve"
DEFAULT_TIMEOUT_S = 3600.0
DEFAULT_MEM_MB = 4096

# stderr fragments that identify resource exhaustion inside the solver
_RESOURCE_PATTERNS = (
    ("max. recursion depth exceeded", "max-depth"),
    ("out of memory", "out-of-memory"),
)


@dataclass(frozen=True)
class SolverOutcome:
    """Raw result of one solver run."""

    status: str  # 'sat' | 'unsat' | 'unknown' | 'timeout' | 'resource' | 'error'
    detail: str = ""
    model: str = ""
    elapsed_s: float = 0.0


def _limit_address_space(mem_mb: int):
    def apply():
        cap = mem_mb * 1024 * 1024
        try:
            resource.setrlimit(resource.RLIMIT_AS, (cap, cap))
        except (ValueError, OSError):
            pass  # caps above the hard limit are best effort

    return apply


def run_solver(
    script_path: str,
    cmd: str = DEFAULT_SOLVER_CMD,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    mem_mb: int = DEFAULT_MEM_MB,
) -> SolverOutcome:
    """Run `cmd <script_path>` and classify what came back."""
    argv = shlex.split(cmd) + [str(script_path)]
    started = time.monotonic()
    try:
        proc = subprocess.Popen(
            argv,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            start_new_session=True,
            preexec_fn=_limit_address_space(mem_mb),
        )
    except FileNotFoundError:
        return SolverOutcome("error", detail=f"solver command not found: {argv[0]}")
    except OSError as exc:
        return SolverOutcome("error", detail=f"could not start solver: {exc}")
    try:
        stdout, stderr = proc.communicate(timeout=timeout_s)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            proc.kill()
        proc.communicate()
        return SolverOutcome(
            "timeout",
            detail=f"solver exceeded {timeout_s:g}s",
            elapsed_s=time.monotonic() - started,
        )
    elapsed = time.monotonic() - started

    status_token = ""
    model = ""
    pos = 0
    for line in stdout.splitlines(keepends=True):
        pos += len(line)
        token = line.strip()
        if token:
            status_token = token.split()[0]
            model = stdout[pos:].strip()
            break

    if status_token in ("sat", "unsat"):
        return SolverOutcome(status_token, model=model, elapsed_s=elapsed)
    for pattern, kind in _RESOURCE_PATTERNS:
        if pattern in stderr:
            return SolverOutcome("resource", detail=kind, elapsed_s=elapsed)
    if status_token == "unknown":
        return SolverOutcome("unknown", model=model, elapsed_s=elapsed)
    detail = stderr.strip() or f"no sat/unsat/unknown on stdout (exit {proc.returncode})"
    return SolverOutcome("error", detail=detail.splitlines()[0], elapsed_s=elapsed)


def verdict_of(outcome: SolverOutcome) -> tuple:
    """Map a run on the negated property to a verdict and a reason.

    unsat: no record assignment violates the property, so it is satisfied.
    sat: the model is a violation witness.  unknown stays unknown, and
    timeout/resource/error outcomes decide nothing.
    """
    if outcome.status == "unsat":
        return Verdict.SATISFIED, ""
    if outcome.status == "sat":
        return Verdict.VIOLATED, ""
    if outcome.status == "unknown":
        return Verdict.UNKNOWN, "solver returned unknown"
    if outcome.status == "timeout":
        return Verdict.INCONCLUSIVE, outcome.detail
    if outcome.status == "resource":
        return Verdict.INCONCLUSIVE, f"solver ran out of resources ({outcome.detail})"
    return Verdict.INCONCLUSIVE, outcome.detail or "solver failed"
