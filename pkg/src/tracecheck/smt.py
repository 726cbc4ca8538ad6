"""Reduction of property checking to SMT satisfiability.

A property holds on a trace iff (negated property) AND (trace as equality
assertions over Int->Real arrays) is unsatisfiable, so the emitted script
asserts exactly that conjunction.  Scripts target AUFLIRA and are
deterministic: translating the same trace and property twice yields
byte-identical output.

The timestamp-to-index map comes in two encodings.  The variable-rate form
expands to a nested ite chain comparing against every record timestamp; it
is always available but costs one ite per record and reading, so a cap
guards against scripts that would dwarf the solver.  The fixed-rate form is
available for zero-origin fixed-rate traces (what resampling produces) and
introduces one existentially bound integer per reading, pinned to
floor(t / sr) by two linear bounds; since those bounds determine the
integer uniquely, the binder is sound under either polarity.

Index-typed accesses are clamped into [0, m] instead of guarded: a total
function keeps the encoding in the decidable fragment, and out-of-range
accesses only arise in cases the direct route reports as inconclusive, so
the routes never contradict each other on a definitive answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .syntax import (
    Arith,
    AtIndex,
    AtTime,
    Exists,
    Formula,
    I2T,
    Interval,
    Lit,
    Not,
    Or,
    Rel,
    Sort,
    T2I,
    Term,
    Var,
    desugar,
)
from .trace import Fixed, Trace, format_rational, trace_digest

from . import __version__


DEFAULT_EXPANSION_CAP = 50_000

_SMT_RESERVED = {
    "t", "and", "or", "not", "ite", "let", "exists", "forall", "select",
    "store", "to_real", "to_int", "assert", "true", "false", "Int", "Real",
    "Array", "Bool", "div", "mod", "abs",
}

_GREEK = {"σ": "sigma", "τ": "tau", "ρ": "rho", "Σ": "Sigma", "Τ": "Tau", "Ρ": "Rho"}


class TranslateError(Exception):
    """The property/trace pair cannot be encoded as requested."""


class ExpansionCapError(TranslateError):
    """The variable-rate index map would expand past the configured cap."""


@dataclass(frozen=True)
class VariableRate:
    """Index map by comparison against every record timestamp."""

    def describe(self) -> str:
        return "variable-rate"


@dataclass(frozen=True)
class FixedRate:
    """Index map as floor(t / sr) for a zero-origin fixed-rate trace."""

    sr: Fraction

    def describe(self) -> str:
        return f"fixed-rate sr={format_rational(self.sr)}"


IotaMode = Union[VariableRate, FixedRate]


def choose_iota_mode(trace: Trace, requested: Optional[str] = None) -> IotaMode:
    """Pick the index-map encoding.

    `auto` (or None) uses the fixed-rate form whenever the trace allows it;
    an explicit `fixed` on an unsuitable trace is an error rather than a
    silent fallback.
    """
    fixed_ok = isinstance(trace.rate, Fixed) and trace.t0 == 0
    if requested in (None, "auto"):
        return FixedRate(trace.rate.sr) if fixed_ok else VariableRate()
    if requested == "variable":
        return VariableRate()
    if requested == "fixed":
        if not fixed_ok:
            raise TranslateError(
                "the fixed-rate index map needs a fixed-rate trace starting "
                "at time 0; resample first (strategy A2) or use --iota variable"
            )
        return FixedRate(trace.rate.sr)
    raise TranslateError(f"unknown iota mode {requested!r}")


# ---------------------------------------------------------------------------
# Literals and names
# ---------------------------------------------------------------------------

def smt_real(value: Fraction) -> str:
    """Exact Real literal: decimal when finite, (/ p q) otherwise."""
    mag = -value if value < 0 else value
    text = format_rational(mag)
    if "/" in text:
        p, q = text.split("/")
        core = f"(/ {p}.0 {q}.0)"
    else:
        core = text if "." in text else text + ".0"
    return f"(- {core})" if value < 0 else core


def smt_int(value: Union[int, Fraction]) -> str:
    n = int(value)
    return f"(- {-n})" if n < 0 else str(n)


def _transliterate(name: str) -> str:
    out = []
    for ch in name:
        if ch in _GREEK:
            out.append(_GREEK[ch])
        elif ch.isascii() and (ch.isalnum() or ch == "_"):
            out.append(ch)
        else:
            out.append("_")
    text = "".join(out)
    if not text or text[0].isdigit():
        text = "x" + text
    return text


def _fresh(base: str, taken: set) -> str:
    name = base
    n = 1
    while name in taken or name in _SMT_RESERVED:
        n += 1
        name = f"{base}_{n}"
    taken.add(name)
    return name


@dataclass
class _Floor:
    k: str
    arg: str  # already-emitted time expression


@dataclass
class _Tx:
    trace: Trace
    mode: IotaMode
    arrays: Dict[str, str]
    cap: int
    taken: set
    iota_ites: int = 0
    quantifiers: int = 0
    floors: int = 0
    lets: int = 0
    pending_floors: List[_Floor] = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.trace.last_index

    def fresh_let(self) -> str:
        self.lets += 1
        return f"x{self.lets}"


@dataclass(frozen=True)
class SmtScript:
    text: str
    iota_mode: IotaMode
    name_map: Dict[str, str]
    quantifier_count: int
    floor_count: int
    iota_ite_count: int


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

def _clamped_index(j_expr: str, m: int, ctx: _Tx, already_bound: bool = False) -> str:
    """ite-clamp an Int expression into [0, m]."""
    if already_bound:
        j = j_expr
        inner = f"(ite (< {j} 0) 0 (ite (> {j} {m}) {m} {j}))"
        return inner
    name = ctx.fresh_let()
    inner = f"(ite (< {name} 0) 0 (ite (> {name} {m}) {m} {name}))"
    return f"(let (({name} {j_expr})) {inner})"


def _iota_chain(x: str, ctx: _Tx) -> str:
    """Nested ite resolving a bound Real variable to its record index."""
    ts = ctx.trace.timestamps
    m = ctx.m
    ctx.iota_ites += m
    if ctx.iota_ites > ctx.cap:
        raise ExpansionCapError(
            f"the variable-rate index map needs {ctx.iota_ites} ite nodes, "
            f"over the cap of {ctx.cap}; resample the trace to a fixed-rate "
            "grid (strategy A2) or raise the cap"
        )
    chain = str(m)
    for j in range(m - 1, -1, -1):
        chain = f"(ite (< {x} {smt_real(ts[j + 1])}) {j} {chain})"
    return chain


def _iota_at(time_expr: str, ctx: _Tx) -> str:
    """Int expression for the record index of a time expression."""
    if isinstance(ctx.mode, VariableRate):
        name = ctx.fresh_let()
        return f"(let (({name} {time_expr})) {_iota_chain(name, ctx)})"
    k = _fresh(f"k{ctx.floors + 1}", ctx.taken)
    ctx.floors += 1
    ctx.pending_floors.append(_Floor(k, time_expr))
    return k


def emit_term(term: Term, scope: Dict[str, str], ctx: _Tx) -> str:
    if isinstance(term, Lit):
        return smt_int(term.value) if term.sort is Sort.INDEX else smt_real(term.value)
    if isinstance(term, Var):
        return scope[term.name]
    if isinstance(term, Arith):
        left = emit_term(term.left, scope, ctx)
        right = emit_term(term.right, scope, ctx)
        return f"({term.op} {left} {right})"
    if isinstance(term, I2T):
        j = emit_term(term.index, scope, ctx)
        return f"(select t {_clamped_index(j, ctx.m, ctx)})"
    if isinstance(term, T2I):
        return _iota_at(emit_term(term.time, scope, ctx), ctx)
    if isinstance(term, AtIndex):
        j = emit_term(term.index, scope, ctx)
        return f"(select {ctx.arrays[term.signal]} {_clamped_index(j, ctx.m, ctx)})"
    if isinstance(term, AtTime):
        idx = _iota_at(emit_term(term.time, scope, ctx), ctx)
        if isinstance(ctx.mode, FixedRate):
            idx = _clamped_index(idx, ctx.m, ctx, already_bound=True)
        return f"(select {ctx.arrays[term.signal]} {idx})"
    raise TypeError(f"not a term: {term!r}")


# ---------------------------------------------------------------------------
# Formulas (desugared core: Rel / Not / Or / Exists)
# ---------------------------------------------------------------------------

def _floor_bounds(fl: _Floor, ctx: _Tx) -> List[str]:
    sr = smt_real(ctx.mode.sr)
    return [
        f"(<= (* {sr} (to_real {fl.k})) {fl.arg})",
        f"(< {fl.arg} (* {sr} (to_real (+ {fl.k} 1))))",
    ]


def emit_formula(f: Formula, scope: Dict[str, str], ctx: _Tx) -> str:
    if isinstance(f, Rel):
        saved = ctx.pending_floors
        ctx.pending_floors = []
        left = emit_term(f.left, scope, ctx)
        right = emit_term(f.right, scope, ctx)
        atom = (
            f"(not (= {left} {right}))"
            if f.op == "!="
            else f"({f.op} {left} {right})"
        )
        floors = ctx.pending_floors
        ctx.pending_floors = saved
        if floors:
            parts: List[str] = []
            for fl in floors:
                parts.extend(_floor_bounds(fl, ctx))
            parts.append(atom)
            body = parts[0]
            for p in parts[1:]:
                body = f"(and {body} {p})"
            return f"(exists (({floors[0].k} Int)" + "".join(
                f" ({fl.k} Int)" for fl in floors[1:]
            ) + f") {body})"
        return atom
    if isinstance(f, Not):
        return f"(not {emit_formula(f.sub, scope, ctx)})"
    if isinstance(f, Or):
        left = emit_formula(f.left, scope, ctx)
        right = emit_formula(f.right, scope, ctx)
        return f"(or {left} {right})"
    if isinstance(f, Exists):
        return _emit_exists(f, scope, ctx)
    raise TranslateError(
        f"internal: {type(f).__name__} survived desugaring"
    )


def _emit_exists(f: Exists, scope: Dict[str, str], ctx: _Tx) -> str:
    ctx.quantifiers += 1
    name = _fresh(_transliterate(f.var), ctx.taken)
    inner_scope = {**scope, f.var: name}

    if f.var_sort is Sort.VALUE:
        body = emit_formula(f.body, inner_scope, ctx)
        ctx.taken.discard(name)
        return f"(exists (({name} Real)) {body})"

    if f.var_sort is Sort.INDEX:
        lo = int(f.interval.lo) + (1 if f.interval.lo_open else 0)
        hi = int(f.interval.hi) - (1 if f.interval.hi_open else 0)
        lo = max(lo, 0)
        hi = min(hi, ctx.m)
        if lo > hi:
            ctx.taken.discard(name)
            return "false"
        guard = f"(and (<= {smt_int(lo)} {name}) (<= {name} {smt_int(hi)}))"
        body = emit_formula(f.body, inner_scope, ctx)
        ctx.taken.discard(name)
        return f"(exists (({name} Int)) (and {guard} {body}))"

    # time variable: interval clipped to the trace span
    lo, lo_open = f.interval.lo, f.interval.lo_open
    hi, hi_open = f.interval.hi, f.interval.hi_open
    if lo < ctx.trace.t0:
        lo, lo_open = ctx.trace.t0, False
    if hi > ctx.trace.tm:
        hi, hi_open = ctx.trace.tm, False
    if lo > hi or (lo == hi and (lo_open or hi_open)):
        ctx.taken.discard(name)
        return "false"
    lo_op = "<" if lo_open else "<="
    hi_op = "<" if hi_open else "<="
    guard = f"(and ({lo_op} {smt_real(lo)} {name}) ({hi_op} {name} {smt_real(hi)}))"
    body = emit_formula(f.body, inner_scope, ctx)
    ctx.taken.discard(name)
    return f"(exists (({name} Real)) (and {guard} {body}))"


# ---------------------------------------------------------------------------
# Scripts
# ---------------------------------------------------------------------------

def translate(
    trace: Trace,
    formula: Formula,
    mode: Optional[IotaMode] = None,
    negate: bool = True,
    cap: int = DEFAULT_EXPANSION_CAP,
) -> SmtScript:
    """Emit a complete SMT-LIB script for one trace/property pair.

    With negate=True (the checking reduction) the script is unsatisfiable
    exactly when the property holds on the trace.
    """
    if mode is None:
        mode = choose_iota_mode(trace)
    taken = {"t"}
    arrays: Dict[str, str] = {}
    for signal in sorted(trace.signals):
        arrays[signal] = _fresh("v_" + _transliterate(signal), taken)
    ctx = _Tx(trace=trace, mode=mode, arrays=arrays, cap=cap, taken=taken)

    core = desugar(Not(formula) if negate else formula)
    assertion = emit_formula(core, {}, ctx)

    lines: List[str] = []
    lines.append(f"; tracecheck {__version__}")
    lines.append(f"; iota mode: {mode.describe()}")
    lines.append(
        f"; trace: digest={trace_digest(trace)} records={len(trace)} "
        f"span=[{format_rational(trace.t0)}, {format_rational(trace.tm)}]"
    )
    for signal in sorted(arrays):
        lines.append(f"; signal: {signal} -> {arrays[signal]}")
    lines.append("(set-logic AUFLIRA)")
    lines.append("(declare-const t (Array Int Real))")
    for signal in sorted(arrays):
        lines.append(f"(declare-const {arrays[signal]} (Array Int Real))")
    for record in trace.records:
        j = record.index
        lines.append(f"(assert (= (select t {j}) {smt_real(record.timestamp)}))")
        for signal in sorted(arrays):
            if signal in record.values:
                lines.append(
                    f"(assert (= (select {arrays[signal]} {j}) "
                    f"{smt_real(record.values[signal])}))"
                )
    lines.append(f"(assert {assertion})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return SmtScript(
        text="\n".join(lines) + "\n",
        iota_mode=mode,
        name_map=dict(arrays),
        quantifier_count=ctx.quantifiers,
        floor_count=ctx.floors,
        iota_ite_count=ctx.iota_ites,
    )
