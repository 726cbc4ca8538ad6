"""Direct evaluation of properties over a concrete trace.

This is the oracle route: no solver, just recursive evaluation with exact
rationals.  Truth is three-valued.  A term can fail to denote (index outside
[0, m], timestamp outside the span, a read of an unassigned cell), and such
errors propagate unless a sibling already decides the connective: a
disjunction with one true branch is true no matter what the other branch
does, and dually for conjunction.  An error that survives to the root makes
the check inconclusive instead of silently picking a side.

Index quantifiers enumerate the integers of their interval clipped to
[0, m].  Time quantifiers range over the interval clipped to the trace span;
since every mapped index is piecewise constant in the quantified variable
and every direct time comparison is affine in it, the body's truth value
only changes at finitely many breakpoints, so evaluating the interval
endpoints, the breakpoints and one point inside each gap between them
decides the quantifier exactly.

The route cannot decide everything.  Unbounded real quantifiers, arguments
mixing a time variable with a deeper-bound one, and conversions stacked on
the same time variable are outside its fragment and reported as
inconclusive; the solver route has no such restriction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .solver import Verdict
from .syntax import (
    And,
    Arith,
    AtIndex,
    AtTime,
    Exists,
    Forall,
    Formula,
    I2T,
    Implies,
    Interval,
    Lit,
    Not,
    Or,
    Rel,
    Sort,
    T2I,
    Term,
    Var,
    free_vars,
)
from .trace import DomainError, Trace, format_rational, iota_variable, value_at


class EvalError(Exception):
    """A term failed to denote; carries a human-readable reason."""


class OutsideFragment(Exception):
    """The formula needs reasoning this route does not implement."""


Assignment = Dict[str, Fraction]


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

def _as_index(value: Fraction, origin: str) -> int:
    if value.denominator != 1:
        raise EvalError(f"{origin} produced the non-integer index {value}")
    return int(value)


def eval_term(trace: Trace, term: Term, env: Optional[Assignment] = None) -> Fraction:
    """Value of a closed-under-env term; raises EvalError when undefined."""
    env = env or {}
    if isinstance(term, Lit):
        return term.value
    if isinstance(term, Var):
        try:
            return env[term.name]
        except KeyError:
            raise EvalError(f"unbound variable {term.name!r}") from None
    if isinstance(term, Arith):
        left = eval_term(trace, term.left, env)
        right = eval_term(trace, term.right, env)
        if term.op == "+":
            return left + right
        if term.op == "-":
            return left - right
        return left * right
    if isinstance(term, I2T):
        j = _as_index(eval_term(trace, term.index, env), "i2t argument")
        if j < 0 or j > trace.last_index:
            raise EvalError(f"index {j} out of range [0, {trace.last_index}]")
        return trace.timestamps[j]
    if isinstance(term, T2I):
        t = eval_term(trace, term.time, env)
        try:
            return Fraction(iota_variable(trace, t))
        except DomainError as exc:
            raise EvalError(str(exc)) from None
    if isinstance(term, AtIndex):
        j = _as_index(eval_term(trace, term.index, env), "index expression")
        try:
            return value_at(trace, term.signal, j)
        except DomainError as exc:
            raise EvalError(str(exc)) from None
    if isinstance(term, AtTime):
        t = eval_term(trace, term.time, env)
        try:
            j = iota_variable(trace, t)
            return value_at(trace, term.signal, j)
        except DomainError as exc:
            raise EvalError(str(exc)) from None
    raise TypeError(f"not a term: {term!r}")


# ---------------------------------------------------------------------------
# Three-valued connectives
# ---------------------------------------------------------------------------

TV = Union[bool, EvalError]


def _not(v: TV) -> TV:
    return v if isinstance(v, EvalError) else (not v)


def _any(values: Sequence[TV]) -> TV:
    err: Optional[EvalError] = None
    for v in values:
        if v is True:
            return True
        if isinstance(v, EvalError) and err is None:
            err = v
    return err if err is not None else False


def _all(values: Sequence[TV]) -> TV:
    err: Optional[EvalError] = None
    for v in values:
        if v is False:
            return False
        if isinstance(v, EvalError) and err is None:
            err = v
    return err if err is not None else True


_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


# ---------------------------------------------------------------------------
# Breakpoint analysis for time quantifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Affine:
    """a*v + b for the decision variable v."""

    a: Fraction
    b: Fraction


class _SkipProbe(Exception):
    """A constant subterm failed to evaluate; it contributes no breakpoints."""


def _affine_in(
    trace: Trace, expr: Term, v: str, env: Assignment
) -> _Affine:
    """Decompose a time expression as a*v + b, or reject the fragment."""
    if isinstance(expr, Var):
        if expr.name == v:
            return _Affine(Fraction(1), Fraction(0))
        if expr.name in env:
            return _Affine(Fraction(0), env[expr.name])
        raise OutsideFragment(
            f"argument mixes {v!r} with the deeper-bound variable {expr.name!r}"
        )
    if isinstance(expr, Lit):
        return _Affine(Fraction(0), expr.value)
    if isinstance(expr, Arith):
        if expr.op == "*":
            if isinstance(expr.left, Lit):
                k, other = expr.left.value, expr.right
            else:
                k, other = expr.right.value, expr.left
            inner = _affine_in(trace, other, v, env)
            return _Affine(inner.a * k, inner.b * k)
        la = _affine_in(trace, expr.left, v, env)
        ra = _affine_in(trace, expr.right, v, env)
        if expr.op == "+":
            return _Affine(la.a + ra.a, la.b + ra.b)
        return _Affine(la.a - ra.a, la.b - ra.b)
    # conversions and signal reads: constant only
    if v in free_vars(expr):
        raise OutsideFragment(
            f"conversions stacked over the quantified variable {v!r}"
        )
    missing = free_vars(expr) - set(env)
    if missing:
        raise OutsideFragment(
            f"argument mixes {v!r} with the deeper-bound variable "
            f"{sorted(missing)[0]!r}"
        )
    try:
        return _Affine(Fraction(0), eval_term(trace, expr, env))
    except EvalError:
        raise _SkipProbe() from None


def _term_sort(term: Term) -> Sort:
    if isinstance(term, (Var, Lit, Arith)):
        return term.sort if term.sort is not None else Sort.VALUE
    if isinstance(term, I2T):
        return Sort.TIME
    if isinstance(term, T2I):
        return Sort.INDEX
    return Sort.VALUE


def _breakpoints(
    trace: Trace, body: Formula, v: str, env: Assignment
) -> Set[Fraction]:
    """Candidate time points where the body's truth can flip as v moves."""
    points: Set[Fraction] = set()

    def probe(expr: Term):
        if v not in free_vars(expr):
            return
        try:
            aff = _affine_in(trace, expr, v, env)
        except _SkipProbe:
            return
        if aff.a == 0:
            return
        for tj in trace.timestamps:
            points.add((tj - aff.b) / aff.a)

    def scan_term(term: Term):
        if isinstance(term, (Var, Lit)):
            return
        if isinstance(term, Arith):
            scan_term(term.left)
            scan_term(term.right)
        elif isinstance(term, I2T):
            scan_term(term.index)
        elif isinstance(term, T2I):
            probe(term.time)
            scan_term(term.time)
        elif isinstance(term, AtIndex):
            scan_term(term.index)
        elif isinstance(term, AtTime):
            probe(term.time)
            scan_term(term.time)

    def crossing(rel: Rel):
        # a direct comparison of time terms flips where the sides meet
        if _term_sort(rel.left) is not Sort.TIME and _term_sort(rel.right) is not Sort.TIME:
            return
        if v not in free_vars(rel.left) | free_vars(rel.right):
            return
        try:
            la = _affine_in(trace, rel.left, v, env)
            ra = _affine_in(trace, rel.right, v, env)
        except _SkipProbe:
            return
        da, db = la.a - ra.a, la.b - ra.b
        if da != 0:
            points.add(-db / da)

    def scan(f: Formula):
        if isinstance(f, Rel):
            scan_term(f.left)
            scan_term(f.right)
            crossing(f)
        elif isinstance(f, Not):
            scan(f.sub)
        elif isinstance(f, (And, Or, Implies)):
            scan(f.left)
            scan(f.right)
        elif isinstance(f, (Exists, Forall)):
            scan(f.body)

    scan(body)
    return points


def _clip_to_span(iv: Interval, trace: Trace) -> Tuple[Fraction, bool, Fraction, bool]:
    lo, lo_open = iv.lo, iv.lo_open
    hi, hi_open = iv.hi, iv.hi_open
    if lo < trace.t0:
        lo, lo_open = trace.t0, False
    if hi > trace.tm:
        hi, hi_open = trace.tm, False
    return lo, lo_open, hi, hi_open


def _interval_text(iv: Interval) -> str:
    return (
        f"{'(' if iv.lo_open else '['}{format_rational(iv.lo)}, "
        f"{format_rational(iv.hi)}{')' if iv.hi_open else ']'}"
    )


def _time_candidates(
    trace: Trace, iv: Interval, body: Formula, v: str, env: Assignment
) -> Union[List[Fraction], EvalError]:
    if iv.hi < trace.t0 or iv.lo > trace.tm:
        return EvalError(
            f"time interval {_interval_text(iv)} lies outside the trace span "
            f"[{format_rational(trace.t0)}, {format_rational(trace.tm)}]"
        )
    lo, lo_open, hi, hi_open = _clip_to_span(iv, trace)
    if lo > hi or (lo == hi and (lo_open or hi_open)):
        return EvalError(f"time interval {_interval_text(iv)} is empty")
    fence = [lo] + sorted(
        p for p in _breakpoints(trace, body, v, env) if lo < p < hi
    ) + [hi]
    candidates: List[Fraction] = []
    if not lo_open:
        candidates.append(lo)
    candidates.extend(fence[1:-1])
    if not hi_open and hi != lo:
        candidates.append(hi)
    for a, b in zip(fence, fence[1:]):
        candidates.append((a + b) / 2)
    return sorted(set(candidates))


def _index_candidates(iv: Interval, last_index: int) -> Union[List[int], EvalError]:
    start = int(iv.lo) + (1 if iv.lo_open else 0)
    end = int(iv.hi) - (1 if iv.hi_open else 0)
    if start > end:
        return EvalError(f"index interval {_interval_text(iv)} is empty")
    clipped_start = max(start, 0)
    clipped_end = min(end, last_index)
    if clipped_start > clipped_end:
        return EvalError(
            f"index interval {_interval_text(iv)} exceeds the trace bounds "
            f"[0, {last_index}]"
        )
    return list(range(clipped_start, clipped_end + 1))


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

def _ev(trace: Trace, f: Formula, env: Assignment) -> TV:
    if isinstance(f, Rel):
        try:
            left = eval_term(trace, f.left, env)
            right = eval_term(trace, f.right, env)
        except EvalError as exc:
            return exc
        return _CMP[f.op](left, right)
    if isinstance(f, Not):
        return _not(_ev(trace, f.sub, env))
    if isinstance(f, And):
        return _all([_ev(trace, f.left, env), _ev(trace, f.right, env)])
    if isinstance(f, Or):
        return _any([_ev(trace, f.left, env), _ev(trace, f.right, env)])
    if isinstance(f, Implies):
        return _any([_not(_ev(trace, f.left, env)), _ev(trace, f.right, env)])
    if isinstance(f, (Exists, Forall)):
        return _quant(trace, f, env)
    raise TypeError(f"not a formula: {f!r}")


def _quant(trace: Trace, f: Union[Exists, Forall], env: Assignment) -> TV:
    if f.interval is None:
        raise OutsideFragment(
            f"unbounded real quantifier over {f.var!r}; use the solver route"
        )
    if f.var_sort is Sort.INDEX:
        domain = _index_candidates(f.interval, trace.last_index)
        if isinstance(domain, EvalError):
            return domain
        values = [Fraction(j) for j in domain]
    else:
        domain = _time_candidates(trace, f.interval, f.body, f.var, env)
        if isinstance(domain, EvalError):
            return domain
        values = domain

    combine = _any if isinstance(f, Exists) else _all
    decider = True if isinstance(f, Exists) else False
    results: List[TV] = []
    for value in values:
        r = _ev(trace, f.body, {**env, f.var: value})
        results.append(r)
        if r is decider:
            break
    return combine(results)


def evaluate(trace: Trace, f: Formula, env: Optional[Assignment] = None) -> bool:
    """Two-valued evaluation; raises EvalError when the truth is undefined."""
    result = _ev(trace, f, env or {})
    if isinstance(result, EvalError):
        raise result
    return result


@dataclass(frozen=True)
class DirectResult:
    verdict: Verdict
    reason: str = ""


def fragment_gap(f: Formula) -> Optional[str]:
    """Why this route cannot evaluate f, or None if it can try."""
    if isinstance(f, (Exists, Forall)):
        if f.interval is None:
            return f"unbounded real quantifier over {f.var!r}"
        return fragment_gap(f.body)
    if isinstance(f, Not):
        return fragment_gap(f.sub)
    if isinstance(f, (And, Or, Implies)):
        return fragment_gap(f.left) or fragment_gap(f.right)
    return None


def check_direct(trace: Trace, f: Formula) -> DirectResult:
    """Decide a property by direct evaluation where the fragment allows."""
    gap = fragment_gap(f)
    if gap is not None:
        return DirectResult(
            Verdict.INCONCLUSIVE, f"outside the direct-evaluation fragment: {gap}"
        )
    try:
        result = _ev(trace, f, {})
    except OutsideFragment as exc:
        return DirectResult(
            Verdict.INCONCLUSIVE, f"outside the direct-evaluation fragment: {exc}"
        )
    if isinstance(result, EvalError):
        return DirectResult(Verdict.INCONCLUSIVE, str(result))
    return DirectResult(Verdict.SATISFIED if result else Verdict.VIOLATED)
