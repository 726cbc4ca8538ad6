"""A small SMT-LIB evaluator for scripts over fully pinned trace arrays.

Installed as the `tracecheck-solve` console script so checking works out of
the box; any SMT-LIB solver binary can replace it via --solver.

This is an evaluator, not a general solver: it assumes the interesting
structure lives in the quantifiers while the arrays are pinned cell by cell
by equality assertions, which is exactly the shape of the scripts this
package emits.  Within that shape it is exact:

* assertions of the form (= (select arr j) literal) or (= const literal)
  become bindings; contradictory bindings are immediately unsat;
* integer quantifiers are decided by interval bounds extracted from the
  body with polarity tracking, then finite enumeration;
* real quantifiers are decided by evaluating finitely many candidates:
  the window bounds, every point where some comparison affine in the
  variable can flip, every point where a floor-pinned integer can step
  (the (<= (* sr (to_real k)) x) pattern), and a midpoint inside each
  gap.  That set is exhaustive because between consecutive candidates
  every comparison keeps a constant truth value, which a term
  classification pass verifies; when it cannot, the result degrades to
  unknown rather than to a guess.

Reads of unpinned cells, unbounded integer ranges, and real bodies the
classifier cannot account for all evaluate to unknown.  Truth values are
three-valued throughout (True / False / None).
"""

from __future__ import annotations

import argparse
import re
import sys
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .trace import parse_rational

RECURSION_LIMIT = 200_000
THREAD_STACK_BYTES = 512 * 1024 * 1024
INT_ENUM_CAP = 1_000_000
GRID_CAP = 200_000


class ShimError(Exception):
    pass


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")
_NUMERAL_RE = re.compile(r"^\d+(\.\d+)?$")


def parse_script(text: str) -> List[list]:
    lines = []
    for line in text.splitlines():
        cut = line.find(";")
        lines.append(line if cut < 0 else line[:cut])
    tokens = _TOKEN_RE.findall("\n".join(lines))
    stack: List[list] = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ShimError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ShimError("unbalanced '('")
    return stack[0]


# ---------------------------------------------------------------------------
# Values: Fraction | bool | opaque tuples | None (unknown)
# ---------------------------------------------------------------------------

Value = Union[Fraction, bool, tuple, None]


def _opaque(name: str) -> tuple:
    return ("sym", name)


def _is_num(v: Value) -> bool:
    return isinstance(v, Fraction)


def _num(tok: str) -> Optional[Fraction]:
    if _NUMERAL_RE.match(tok):
        return parse_rational(tok)
    return None


def _arith(op: str, args: List[Value]) -> Value:
    if any(a is None for a in args):
        return None
    if all(_is_num(a) for a in args):
        if op == "+":
            out = Fraction(0)
            for a in args:
                out += a
            return out
        if op == "*":
            out = Fraction(1)
            for a in args:
                out *= a
            return out
        if op == "-":
            if len(args) == 1:
                return -args[0]
            out = args[0]
            for a in args[1:]:
                out -= a
            return out
        if op == "/":
            out = args[0]
            for a in args[1:]:
                if a == 0:
                    return None
                out = out / a
            return out
        if op == "to_real":
            return args[0]
        if op == "to_int":
            num = args[0]
            return Fraction(num.numerator // num.denominator)
    # symbolic arithmetic keeps structure so that reflexivity still works
    return ("op", op, *args)


def _compare(op: str, a: Value, b: Value) -> Optional[bool]:
    if a is None or b is None:
        return None
    if _is_num(a) and _is_num(b):
        return {
            "<": a < b, "<=": a <= b, "=": a == b,
            ">=": a >= b, ">": a > b,
        }[op]
    if isinstance(a, bool) and isinstance(b, bool):
        return a == b if op == "=" else None
    if a == b:  # structurally identical symbolic terms denote one value
        return {"<": False, "<=": True, "=": True, ">=": True, ">": False}[op]
    return None


# ---------------------------------------------------------------------------
# Intervals for quantifier bound extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Iv:
    """Interval with optional infinite ends; a None bound means unbounded."""

    lo: Optional[Fraction]
    hi: Optional[Fraction]
    empty: bool = False

    @staticmethod
    def full() -> "_Iv":
        return _Iv(None, None)

    @staticmethod
    def none() -> "_Iv":
        return _Iv(None, None, empty=True)

    def intersect(self, other: "_Iv") -> "_Iv":
        if self.empty or other.empty:
            return _Iv.none()
        lo = self.lo if other.lo is None else (
            other.lo if self.lo is None else max(self.lo, other.lo)
        )
        hi = self.hi if other.hi is None else (
            other.hi if self.hi is None else min(self.hi, other.hi)
        )
        if lo is not None and hi is not None and lo > hi:
            return _Iv.none()
        return _Iv(lo, hi)

    def hull(self, other: "_Iv") -> "_Iv":
        if self.empty:
            return other
        if other.empty:
            return self
        lo = None if (self.lo is None or other.lo is None) else min(self.lo, other.lo)
        hi = None if (self.hi is None or other.hi is None) else max(self.hi, other.hi)
        return _Iv(lo, hi)


_REL_OPS = ("<", "<=", "=", ">=", ">")


def _flip(op: str) -> str:
    return {"<": ">", "<=": ">=", "=": "=", ">=": "<=", ">": "<"}[op]


# Term classes for the real-quantifier completeness analysis.  A term is
# classified by how it can depend on the quantified variable v:
#   GROUND  fixed once the outer environment is fixed (no v, no inner binder)
#   AFFINE  a*v + b with exact rational coefficients
#   PW      piecewise constant in v, jumping only at collected roots
#   QVAR    depends on an inner bound integer but not on v
#   VUNK    depends on v but evaluates to an unknown/symbolic value
#   BAD     a dependence the analysis cannot bound
GROUND, AFFINE, PW, QVAR, VUNK, BAD = range(6)


class _Eval:
    """One script's state: declarations, pins, and the evaluator."""

    def __init__(self):
        self.arrays: Set[str] = set()
        self.consts: Dict[str, str] = {}
        self.pins: Dict[Tuple[str, int], Fraction] = {}
        self.scalar_pins: Dict[str, Fraction] = {}
        self.conflict = False

    # --- declarations and pins ---

    def declare(self, name: str, sort) -> None:
        if isinstance(sort, list) and sort[:1] == ["Array"]:
            self.arrays.add(name)
        else:
            self.consts[name] = sort if isinstance(sort, str) else " ".join(map(str, sort))

    def literal_value(self, e) -> Optional[Fraction]:
        """Constant-fold a ground literal expression, else None."""
        if isinstance(e, str):
            return _num(e)
        if not isinstance(e, list) or not e:
            return None
        head = e[0]
        if head in ("+", "-", "*", "/", "to_real", "to_int"):
            args = [self.literal_value(a) for a in e[1:]]
            if any(a is None for a in args):
                return None
            out = _arith(head, args)
            return out if _is_num(out) else None
        return None

    def try_pin(self, e) -> bool:
        """Record (= (select arr j) lit) / (= name lit) shapes as bindings."""
        if not (isinstance(e, list) and len(e) == 3 and e[0] == "="):
            return False
        for lhs, rhs in ((e[1], e[2]), (e[2], e[1])):
            value = self.literal_value(rhs)
            if value is None:
                continue
            if (
                isinstance(lhs, list)
                and len(lhs) == 3
                and lhs[0] == "select"
                and isinstance(lhs[1], str)
                and lhs[1] in self.arrays
                and isinstance(lhs[2], str)
            ):
                idx = _num(lhs[2])
                if idx is None or idx.denominator != 1:
                    continue
                key = (lhs[1], int(idx))
                if key in self.pins and self.pins[key] != value:
                    self.conflict = True
                self.pins[key] = value
                return True
            if isinstance(lhs, str) and lhs in self.consts:
                if lhs in self.scalar_pins and self.scalar_pins[lhs] != value:
                    self.conflict = True
                self.scalar_pins[lhs] = value
                return True
        return False

    # --- evaluation ---

    def ev(self, e, env: Dict[str, Value]) -> Value:
        if isinstance(e, str):
            if e in env:
                return env[e]
            n = _num(e)
            if n is not None:
                return n
            if e == "true":
                return True
            if e == "false":
                return False
            if e in self.scalar_pins:
                return self.scalar_pins[e]
            if e in self.consts or e in self.arrays:
                return _opaque(e)
            raise ShimError(f"unknown symbol {e!r}")
        if not isinstance(e, list) or not e:
            raise ShimError(f"bad expression {e!r}")
        head = e[0]
        if head in ("+", "-", "*", "/", "to_real", "to_int"):
            return _arith(head, [self.ev(a, env) for a in e[1:]])
        if head in _REL_OPS:
            vals = [self.ev(a, env) for a in e[1:]]
            out: Optional[bool] = True
            for a, b in zip(vals, vals[1:]):
                r = _compare(head, a, b)
                if r is False:
                    return False
                if r is None:
                    out = None
            return out
        if head == "distinct":
            r = _compare("=", self.ev(e[1], env), self.ev(e[2], env))
            return None if r is None else (not r)
        if head == "not":
            r = self.ev(e[1], env)
            return None if r is None else (not r)
        if head == "and":
            out: Optional[bool] = True
            for a in e[1:]:
                r = self.ev(a, env)
                if r is False:
                    return False
                if r is None:
                    out = None
            return out
        if head == "or":
            out = False
            for a in e[1:]:
                r = self.ev(a, env)
                if r is True:
                    return True
                if r is None:
                    out = None
            return out
        if head == "=>":
            args = e[1:]
            acc = self.ev(args[-1], env)
            for a in reversed(args[:-1]):
                left = self.ev(a, env)
                left = None if left is None else (not left)
                if left is True or acc is True:
                    acc = True
                elif left is None or acc is None:
                    acc = None
                else:
                    acc = False
            return acc
        if head == "ite":
            cond = self.ev(e[1], env)
            if cond is None:
                return None
            return self.ev(e[2] if cond else e[3], env)
        if head == "let":
            new_env = dict(env)
            for name, bound in e[1]:
                new_env[name] = self.ev(bound, env)
            return self.ev(e[2], new_env)
        if head == "select":
            arr = e[1]
            idx = self.ev(e[2], env)
            if not isinstance(arr, str) or idx is None or not _is_num(idx):
                return None
            if idx.denominator != 1:
                return None
            return self.pins.get((arr, int(idx)))
        if head == "exists":
            return self.ev_quant(e[1], e[2], env, is_forall=False)
        if head == "forall":
            return self.ev_quant(e[1], e[2], env, is_forall=True)
        raise ShimError(f"unsupported operator {head!r}")

    # --- quantifiers ---

    def ev_quant(self, binders, body, env, is_forall: bool) -> Value:
        if len(binders) > 1:
            body = ["forall" if is_forall else "exists", binders[1:], body]
            binders = binders[:1]
        name, sort = binders[0][0], binders[0][1]
        if is_forall:
            r = self.ev_exists(name, sort, ["not", body], env)
            return None if r is None else (not r)
        return self.ev_exists(name, sort, body, env)

    def ev_exists(self, v: str, sort, body, env) -> Value:
        window = self.bounds(body, v, env, positive=True)
        if window.empty:
            return False
        if sort == "Int":
            return self._exists_int(v, body, env, window)
        return self._exists_real(v, body, env, window)

    def _exists_int(self, v, body, env, window: _Iv) -> Value:
        if window.lo is None or window.hi is None:
            return None
        lo = -(-window.lo.numerator // window.lo.denominator)  # ceil
        hi = window.hi.numerator // window.hi.denominator  # floor
        if hi - lo > INT_ENUM_CAP:
            return None
        saw_unknown = False
        for j in range(lo, hi + 1):
            r = self.ev(body, {**env, v: Fraction(j)})
            if r is True:
                return True
            if r is None:
                saw_unknown = True
        return None if saw_unknown else False

    def _exists_real(self, v, body, env, window: _Iv) -> Value:
        roots, complete = self.real_roots(body, v, env, window)
        pts = sorted(roots)
        lo, hi = window.lo, window.hi
        fence: List[Fraction] = []
        if lo is None:
            fence.append((pts[0] if pts else Fraction(0)) - 1)
        else:
            fence.append(lo)
        fence.extend(p for p in pts if fence[0] < p and (hi is None or p < hi))
        if hi is None:
            tail = (pts[-1] if pts else Fraction(0)) + 1
            if tail > fence[-1]:
                fence.append(tail)
        elif hi > fence[0]:
            fence.append(hi)
        candidates: List[Fraction] = list(fence)
        for a, b in zip(fence, fence[1:]):
            candidates.append((a + b) / 2)
        saw_unknown = False
        for c in sorted(set(candidates)):
            r = self.ev(body, {**env, v: c})
            if r is True:
                return True
            if r is None:
                saw_unknown = True
        if saw_unknown or not complete:
            return None
        return False

    # --- bound extraction (sound overapproximation of the true set) ---

    def bounds(self, e, v: str, env, positive: bool) -> _Iv:
        if isinstance(e, str):
            if e == "true":
                return _Iv.full() if positive else _Iv.none()
            if e == "false":
                return _Iv.none() if positive else _Iv.full()
            return _Iv.full()
        if not isinstance(e, list) or not e:
            return _Iv.full()
        head = e[0]
        if head == "not":
            return self.bounds(e[1], v, env, not positive)
        if head in ("and", "or"):
            parts = [self.bounds(a, v, env, positive) for a in e[1:]]
            meet = (head == "and") == positive
            out = parts[0]
            for p in parts[1:]:
                out = out.intersect(p) if meet else out.hull(p)
            return out
        if head == "=>" and len(e) == 3:
            left = self.bounds(e[1], v, env, not positive)
            right = self.bounds(e[2], v, env, positive)
            return left.hull(right) if positive else left.intersect(right)
        if head in _REL_OPS and len(e) == 3:
            return self._atom_bounds(head, e[1], e[2], v, env, positive)
        if head in ("exists", "forall") and len(e) == 3:
            # sound for either quantifier: truth (or falsity) of the block
            # at some v still needs the body's pure-v atoms to hold, and
            # atoms touching the inner binder decompose to no constraint
            if any(b[0] == v for b in e[1]):
                return _Iv.full()
            return self.bounds(e[2], v, env, positive)
        return _Iv.full()

    def _atom_bounds(self, op, lhs, rhs, v, env, positive) -> _Iv:
        la = self.affine(lhs, v, env, {})
        ra = self.affine(rhs, v, env, {})
        if la is None or ra is None:
            return _Iv.full()
        a = la[0] - ra[0]
        b = la[1] - ra[1]
        if a == 0:
            return _Iv.full()
        if not positive:
            if op == "=":
                return _Iv.full()
            op = _flip(op)  # not (x < c) == x >= c; bounds ignore openness
        point = -b / a
        if op == "=":
            return _Iv(point, point)
        if (op in ("<", "<=")) == (a > 0):
            return _Iv(None, point)
        return _Iv(point, None)

    # --- affine decomposition: e == a*v + b with everything else ground ---

    def affine(
        self, e, v: str, env, lenv: Dict[str, Optional[Tuple[Fraction, Fraction]]]
    ) -> Optional[Tuple[Fraction, Fraction]]:
        if isinstance(e, str):
            if e == v:
                return (Fraction(1), Fraction(0))
            if e in lenv:
                return lenv[e]
            if e in env:
                val = env[e]
                return (Fraction(0), val) if _is_num(val) else None
            n = _num(e)
            if n is not None:
                return (Fraction(0), n)
            if e in self.scalar_pins:
                return (Fraction(0), self.scalar_pins[e])
            return None
        if not isinstance(e, list) or not e:
            return None
        head = e[0]
        if head in ("+", "-"):
            parts = [self.affine(a, v, env, lenv) for a in e[1:]]
            if any(p is None for p in parts):
                return None
            if head == "-" and len(parts) == 1:
                return (-parts[0][0], -parts[0][1])
            a, b = parts[0]
            for pa, pb in parts[1:]:
                if head == "+":
                    a, b = a + pa, b + pb
                else:
                    a, b = a - pa, b - pb
            return (a, b)
        if head == "*":
            parts = [self.affine(x, v, env, lenv) for x in e[1:]]
            if any(p is None for p in parts):
                return None
            a, b = parts[0]
            for pa, pb in parts[1:]:
                if a != 0 and pa != 0:
                    return None  # nonlinear
                if pa == 0:
                    a, b = a * pb, b * pb
                else:
                    a, b = pa * b, pb * b
            return (a, b)
        if head == "/" and len(e) == 3:
            top = self.affine(e[1], v, env, lenv)
            bot = self.affine(e[2], v, env, lenv)
            if top is None or bot is None or bot[0] != 0 or bot[1] == 0:
                return None
            return (top[0] / bot[1], top[1] / bot[1])
        if head == "to_real":
            return self.affine(e[1], v, env, lenv)
        if head == "let":
            new_lenv = dict(lenv)
            for name, bound in e[1]:
                new_lenv[name] = self.affine(bound, v, env, lenv)
            return self.affine(e[2], v, env, new_lenv)
        # select / ite / quantifier: usable only when entirely ground;
        # a stray inner binder (possible when bounds extraction looks
        # inside nested quantifier bodies) just means no constraint
        if self._occurs_any((v,), e, set()):
            return None
        try:
            val = self.ev(e, env)
        except ShimError:
            return None
        return (Fraction(0), val) if _is_num(val) else None

    def _occurs_any(self, names: Sequence[str], e, shadowed: Set[str]) -> bool:
        if isinstance(e, str):
            return e in names and e not in shadowed
        if not isinstance(e, list) or not e:
            return False
        head = e[0]
        if head == "let":
            inner = set(shadowed)
            for name, bound in e[1]:
                if self._occurs_any(names, bound, shadowed):
                    return True
                inner.add(name)
            return self._occurs_any(names, e[2], inner)
        if head in ("exists", "forall"):
            inner = shadowed | {b[0] for b in e[1]}
            return self._occurs_any(names, e[2], inner)
        return any(self._occurs_any(names, a, shadowed) for a in e[1:])

    # --- candidate roots for real quantifiers ---

    def real_roots(
        self, body, v: str, env, window: _Iv
    ) -> Tuple[Set[Fraction], bool]:
        """Points where some comparison's truth can flip, with completeness.

        The walk classifies every term and keeps `complete` True only while
        each comparison stays piecewise constant between the collected
        roots: affine sides contribute their crossings, index chains the
        crossings of their branch conditions, and floor-pinned integers the
        grid crossings of their bound pattern.  Anything else clears the
        flag, and the caller reports unknown instead of trusting a False.
        """
        roots: Set[Fraction] = set()
        complete = True
        covered: Set[int] = set()

        def side_info(e, lenv, vals, qvars):
            cls = self.classify(e, v, env, lenv, vals, qvars, covered)
            if cls[0] == GROUND and _is_num(cls[1]):
                return (AFFINE, (Fraction(0), cls[1]))
            return cls

        def note_atom(node, lenv, vals, qvars):
            nonlocal complete
            infos = [side_info(s, lenv, vals, qvars) for s in node[1:]]
            kinds = {i[0] for i in infos}
            if BAD in kinds:
                if id(node) not in covered:
                    complete = False
                return
            sloped = any(i[0] == AFFINE and i[1][0] != 0 for i in infos)
            if sloped and (kinds & {PW, QVAR}):
                # a sloped side against a stepping side flips off the
                # collected roots; only the covered floor pattern is exact
                if id(node) not in covered:
                    complete = False
                return
            if kinds >= {PW, QVAR} and id(node) not in covered:
                complete = False
                return
            if kinds <= {AFFINE, GROUND}:
                for x, y in zip(infos, infos[1:]):
                    if x[0] != AFFINE or y[0] != AFFINE:
                        continue  # an opaque ground side never yields a root
                    a = x[1][0] - y[1][0]
                    b = x[1][1] - y[1][1]
                    if a != 0:
                        roots.add(-b / a)

        def grid(binder: str, inner_body, lenv, vals, qvars):
            """Add grid crossings for the (<= (* sr (to_real k)) x) pattern."""
            nonlocal complete
            conjuncts: List = []

            def flatten(x):
                if isinstance(x, list) and x[:1] == ["and"]:
                    for part in x[1:]:
                        flatten(part)
                else:
                    conjuncts.append(x)

            flatten(inner_body)
            for c in conjuncts:
                if not (isinstance(c, list) and len(c) == 3 and c[0] in ("<", "<=")):
                    continue
                for mul, x_expr in ((c[1], c[2]), (c[2], c[1])):
                    if not (
                        isinstance(mul, list)
                        and len(mul) == 3
                        and mul[0] == "*"
                        and self._occurs_any((binder,), mul, set())
                    ):
                        continue
                    sr = self.literal_value(mul[1])
                    if sr is None:
                        sr = self.literal_value(mul[2])
                    if sr is None or sr <= 0:
                        continue
                    dec = self.affine(x_expr, v, env, lenv)
                    if dec is None:
                        if self._occurs_any((v,), x_expr, set()):
                            complete = False
                        continue
                    a, b = dec
                    if a == 0:
                        covered.add(id(c))
                        continue
                    if window.lo is None or window.hi is None:
                        complete = False
                        continue
                    x_ends = (a * window.lo + b, a * window.hi + b)
                    ratio_lo = min(x_ends) / sr
                    ratio_hi = max(x_ends) / sr
                    j_lo = ratio_lo.numerator // ratio_lo.denominator
                    j_hi = ratio_hi.numerator // ratio_hi.denominator + 1
                    if j_hi - j_lo > GRID_CAP:
                        complete = False
                        continue
                    for j in range(j_lo, j_hi + 1):
                        roots.add((j * sr - b) / a)
                    covered.add(id(c))

        def walk(node, lenv, vals, qvars: Set[str]):
            if not isinstance(node, list) or not node:
                return
            head = node[0]
            if head in _REL_OPS and len(node) >= 3:
                note_atom(node, lenv, vals, qvars)
                for child in node[1:]:
                    walk(child, lenv, vals, qvars)
                return
            if head == "let":
                new_lenv = dict(lenv)
                new_vals = dict(vals)
                for name, bound in node[1]:
                    walk(bound, lenv, vals, qvars)
                    new_lenv[name] = self.classify(
                        bound, v, env, lenv, vals, qvars, covered
                    )
                    if new_lenv[name][0] == GROUND:
                        new_vals[name] = new_lenv[name][1]
                walk(node[2], new_lenv, new_vals, qvars)
                return
            if head in ("exists", "forall"):
                names = {b[0] for b in node[1]}
                if v in names:
                    return  # our v is shadowed below this point
                for b in node[1]:
                    if b[1] == "Int":
                        grid(b[0], node[2], lenv, vals, qvars)
                walk(node[2], lenv, vals, qvars | names)
                return
            for child in node[1:]:
                walk(child, lenv, vals, qvars)

        walk(body, {}, {}, set())
        return roots, complete

    def classify(self, e, v, env, lenv, vals, qvars, covered):
        """Term class for real_roots; see the class constants above.

        Returns (GROUND, value) | (AFFINE, (a, b)) | (PW,) | (QVAR,) |
        (VUNK,) | (BAD,).  `vals` carries concrete values for let names
        whose bindings are ground, so ground subterms can be evaluated.
        """
        if isinstance(e, str):
            if e == v:
                return (AFFINE, (Fraction(1), Fraction(0)))
            if e in lenv:
                return lenv[e]
            if e in qvars:
                return (QVAR,)
            if e in env:
                return (GROUND, env[e])
            n = _num(e)
            if n is not None:
                return (GROUND, n)
            if e == "true":
                return (GROUND, True)
            if e == "false":
                return (GROUND, False)
            if e in self.scalar_pins:
                return (GROUND, self.scalar_pins[e])
            if e in self.consts or e in self.arrays:
                return (GROUND, _opaque(e))
            return (BAD,)
        if not isinstance(e, list) or not e:
            return (BAD,)
        head = e[0]
        if head in ("+", "-", "*", "/", "to_real", "to_int"):
            parts = [
                self.classify(a, v, env, lenv, vals, qvars, covered) for a in e[1:]
            ]
            kinds = {p[0] for p in parts}
            if BAD in kinds:
                return (BAD,)
            if kinds <= {GROUND}:
                return (GROUND, _arith(head, [p[1] for p in parts]))
            if AFFINE in kinds:
                if kinds & {PW, QVAR}:
                    return (BAD,)
                if VUNK in kinds or any(
                    p[0] == GROUND and not _is_num(p[1]) for p in parts
                ):
                    return (VUNK,)
                if head == "to_int":
                    return (BAD,)
                pairs = [
                    p[1] if p[0] == AFFINE else (Fraction(0), p[1]) for p in parts
                ]
                pair = self._affine_op(head, pairs)
                return (AFFINE, pair) if pair is not None else (BAD,)
            if VUNK in kinds:
                return (VUNK,)
            if kinds >= {PW, QVAR}:
                return (BAD,)
            if PW in kinds:
                return (PW,)
            return (QVAR,)
        if head == "select":
            idx = self.classify(e[2], v, env, lenv, vals, qvars, covered)
            if idx[0] == GROUND:
                return (GROUND, self.ev(e, {**env, **vals}))
            if idx[0] in (PW, QVAR, VUNK):
                return (idx[0],)
            return (BAD,)
        if head == "ite":
            cond = self._bool_class(e[1], v, env, lenv, vals, qvars, covered)
            branches = [
                self.classify(x, v, env, lenv, vals, qvars, covered) for x in e[2:4]
            ]
            kinds = {b[0] for b in branches}
            if BAD in kinds or cond == BAD:
                return (BAD,)
            if cond == GROUND:
                picked = self.ev(e[1], {**env, **vals})
                if picked is True:
                    return branches[0]
                if picked is False:
                    return branches[1]
                return (VUNK,) if AFFINE in kinds or not kinds <= {GROUND} else (GROUND, None)
            if AFFINE in kinds:
                return (BAD,)
            if cond == VUNK or VUNK in kinds:
                return (VUNK,)
            if cond == PW:
                return (PW,) if kinds <= {GROUND, PW} else (BAD,)
            # condition varies only with an inner bound integer
            return (QVAR,) if kinds <= {GROUND, QVAR} else (BAD,)
        if head == "let":
            new_lenv = dict(lenv)
            new_vals = dict(vals)
            for name, bound in e[1]:
                new_lenv[name] = self.classify(bound, v, env, lenv, vals, qvars, covered)
                if new_lenv[name][0] == GROUND:
                    new_vals[name] = new_lenv[name][1]
            return self.classify(e[2], v, env, new_lenv, new_vals, qvars, covered)
        if head in ("exists", "forall"):
            if not self._occurs_any((v,), e, set()):
                return (GROUND, None)
            return (BAD,)
        return (BAD,)

    def _bool_class(self, e, v, env, lenv, vals, qvars, covered) -> int:
        """How a condition's truth can vary with v."""
        if isinstance(e, str):
            return GROUND
        if not isinstance(e, list) or not e:
            return BAD
        head = e[0]
        if head == "not":
            return self._bool_class(e[1], v, env, lenv, vals, qvars, covered)
        if head in ("and", "or", "=>"):
            out = GROUND
            for a in e[1:]:
                c = self._bool_class(a, v, env, lenv, vals, qvars, covered)
                if c == BAD:
                    return BAD
                if c == VUNK or out == VUNK:
                    out = VUNK
                elif out == GROUND:
                    out = c
                elif c not in (GROUND, out):
                    return BAD
            return out
        if head in _REL_OPS:
            parts = [
                self.classify(a, v, env, lenv, vals, qvars, covered) for a in e[1:]
            ]
            kinds = {p[0] for p in parts}
            if BAD in kinds:
                return BAD
            if VUNK in kinds:
                return VUNK
            if any(p[0] == GROUND and not _is_num(p[1]) for p in parts) and kinds != {GROUND}:
                return VUNK
            if AFFINE in kinds:
                sloped = any(p[0] == AFFINE and p[1][0] != 0 for p in parts)
                if not sloped:
                    return self._bool_class_from(kinds - {AFFINE})
                if kinds & {PW, QVAR}:
                    # affine against a stepping side: exact only under the
                    # covered floor pattern
                    return PW if id(e) in covered else BAD
                return PW  # the crossing is collected by the walk
            return self._bool_class_from(kinds)
        return BAD

    @staticmethod
    def _bool_class_from(kinds: Set[int]) -> int:
        kinds = kinds - {GROUND}
        if not kinds:
            return GROUND
        if len(kinds) == 1:
            return kinds.pop()
        return BAD

    @staticmethod
    def _affine_op(head, pairs):
        if head in ("+", "-"):
            a, b = pairs[0]
            if head == "-" and len(pairs) == 1:
                return (-a, -b)
            for pa, pb in pairs[1:]:
                a, b = (a + pa, b + pb) if head == "+" else (a - pa, b - pb)
            return (a, b)
        if head == "*":
            a, b = pairs[0]
            for pa, pb in pairs[1:]:
                if a != 0 and pa != 0:
                    return None
                if pa == 0:
                    a, b = a * pb, b * pb
                else:
                    a, b = pa * b, pb * b
            return (a, b)
        if head == "/" and len(pairs) == 2:
            (ta, tb), (ba, bb) = pairs
            if ba != 0 or bb == 0:
                return None
            return (ta / bb, tb / bb)
        if head == "to_real":
            return pairs[0]
        return None


# ---------------------------------------------------------------------------
# Script execution
# ---------------------------------------------------------------------------

def run_script(text: str) -> List[str]:
    forms = parse_script(text)
    state = _Eval()
    asserts: List = []
    out: List[str] = []
    last_status: Optional[str] = None
    for form in forms:
        if not isinstance(form, list) or not form:
            raise ShimError(f"bad top-level form {form!r}")
        head = form[0]
        if head in ("set-logic", "set-option", "set-info", "push", "pop", "exit"):
            continue
        if head == "declare-const":
            state.declare(form[1], form[2])
            continue
        if head == "declare-fun":
            if form[2] == []:
                state.declare(form[1], form[3])
                continue
            raise ShimError("uninterpreted functions with arguments are not supported")
        if head == "assert":
            if not state.try_pin(form[1]):
                asserts.append(form[1])
            continue
        if head == "check-sat":
            last_status = _decide(state, asserts)
            out.append(last_status)
            continue
        if head == "get-model":
            if last_status == "sat":
                out.append("(model )")
            continue
        raise ShimError(f"unsupported command {head!r}")
    return out


def _decide(state: _Eval, asserts: List) -> str:
    if state.conflict:
        return "unsat"
    saw_unknown = False
    for e in asserts:
        r = state.ev(e, {})
        if r is False:
            return "unsat"
        if r is None:
            saw_unknown = True
    return "unknown" if saw_unknown else "sat"


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="tracecheck-solve",
        description="evaluate an SMT-LIB script over pinned trace arrays",
    )
    parser.add_argument("script", help="path to the .smt2 file, or - for stdin")
    args = parser.parse_args(argv)
    if args.script == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(args.script, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"cannot read script: {exc}", file=sys.stderr)
            return 1

    result: dict = {}

    def work():
        try:
            sys.setrecursionlimit(RECURSION_LIMIT)
            result["out"] = run_script(text)
        except BaseException as exc:  # noqa: BLE001 - classified below
            result["exc"] = exc

    try:
        threading.stack_size(THREAD_STACK_BYTES)
    except (ValueError, RuntimeError):
        pass
    try:
        worker = threading.Thread(target=work)
        worker.start()
    except (RuntimeError, MemoryError):
        # a tight address-space cap can make the big stack unreservable;
        # run on the main stack and let deep scripts fail loudly instead
        work()
    else:
        worker.join()

    exc = result.get("exc")
    if exc is not None:
        if isinstance(exc, RecursionError):
            print("max. recursion depth exceeded", file=sys.stderr)
        elif isinstance(exc, MemoryError):
            print("out of memory", file=sys.stderr)
        elif isinstance(exc, ShimError):
            print(str(exc), file=sys.stderr)
        else:
            print(f"internal error: {exc!r}", file=sys.stderr)
        return 1
    for line in result["out"]:
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
