"""Tests for the bundled SMT-LIB evaluator behind tracecheck-solve."""

import sys
from fractions import Fraction

import pytest

from tracecheck import shim
from tracecheck.preprocess import PreprocessConfig, apply_a2
from tracecheck.shim import ShimError, parse_script, run_script
from tracecheck.smt import FixedRate, VariableRate, translate
from tracecheck.syntax import parse


def status(text):
    out = run_script(text)
    assert out, "script produced no check-sat answer"
    return out[0]


class TestParsing:
    def test_nested_lists(self):
        forms = parse_script("(a (b c) 1.5) (d)")
        assert forms == [["a", ["b", "c"], "1.5"], ["d"]]

    def test_comments_stripped(self):
        forms = parse_script("; top\n(a ; trailing\n b)")
        assert forms == [["a", "b"]]

    def test_unbalanced_open(self):
        with pytest.raises(ShimError, match="unbalanced"):
            parse_script("(a (b)")

    def test_unbalanced_close(self):
        with pytest.raises(ShimError, match="unbalanced"):
            parse_script("(a))")

    def test_deep_nesting_is_iterative(self):
        # the parser must not recurse per paren
        deep = "(" * 50_000 + "x" + ")" * 50_000
        forms = parse_script(deep)
        for _ in range(50_000 - 1):
            forms = forms[0]
        assert forms == [["x"]]


class TestGroundAssertions:
    @pytest.mark.parametrize(
        "text,want",
        [
            ("(assert (= 1 2)) (check-sat)", "unsat"),
            ("(assert (= 1 1)) (check-sat)", "sat"),
            ("(assert (< 0.2 0.3)) (check-sat)", "sat"),
            ("(assert (= (/ 1.0 3.0) (/ 2.0 6.0))) (check-sat)", "sat"),
            ("(assert (= (- 2.5) (- 2.5))) (check-sat)", "sat"),
            ("(assert (= (+ 1 2 3) 6)) (check-sat)", "sat"),
            ("(assert (not (= 1 2))) (check-sat)", "sat"),
            ("(assert (=> false (= 1 2))) (check-sat)", "sat"),
            ("(assert (distinct 1 2)) (check-sat)", "sat"),
            ("(assert (= (to_real 3) 3.0)) (check-sat)", "sat"),
            ("(assert (= (to_int 3.7) 3)) (check-sat)", "sat"),
        ],
    )
    def test_literal_scripts(self, text, want):
        assert status(text) == want

    def test_let_bindings_are_parallel(self):
        text = """
        (assert (let ((x 1)) (let ((x 2) (y x)) (= y 1))))
        (check-sat)
        """
        assert status(text) == "sat"

    def test_division_by_zero_is_unknown(self):
        assert status("(assert (= (/ 1.0 0.0) 5.0)) (check-sat)") == "unknown"


class TestOpaqueConstants:
    def test_reflexive_equality(self):
        assert status("(declare-const x Real) (assert (= x x)) (check-sat)") == "sat"

    def test_irreflexive_order(self):
        assert status("(declare-const x Real) (assert (< x x)) (check-sat)") == "unsat"

    def test_reflexive_le(self):
        assert status("(declare-const x Real) (assert (<= x x)) (check-sat)") == "sat"

    def test_distinct_opaques_unknown(self):
        text = "(declare-const x Real) (declare-const y Real) (assert (= x y)) (check-sat)"
        assert status(text) == "unknown"

    def test_structural_compound_equality(self):
        text = "(declare-const x Real) (assert (= (+ x 1.0) (+ x 1.0))) (check-sat)"
        assert status(text) == "sat"


class TestPins:
    def test_scalar_pin_used(self):
        text = "(declare-const y Real) (assert (= y 1.5)) (assert (< y 2.0)) (check-sat)"
        assert status(text) == "sat"

    def test_scalar_pin_reversed_sides(self):
        text = "(declare-const y Real) (assert (= 1.5 y)) (assert (< y 2.0)) (check-sat)"
        assert status(text) == "sat"

    def test_conflicting_scalar_pins(self):
        text = "(declare-const y Real) (assert (= y 1.0)) (assert (= y 2.0)) (check-sat)"
        assert status(text) == "unsat"

    def test_array_pin(self):
        text = """
        (declare-const a (Array Int Real))
        (assert (= (select a 0) 3.5))
        (assert (> (select a 0) 3.0))
        (check-sat)
        """
        assert status(text) == "sat"

    def test_conflicting_array_pins(self):
        text = """
        (declare-const a (Array Int Real))
        (assert (= (select a 0) 3.5))
        (assert (= (select a 0) 3.0))
        (check-sat)
        """
        assert status(text) == "unsat"

    def test_duplicate_identical_pin_is_fine(self):
        text = """
        (declare-const a (Array Int Real))
        (assert (= (select a 0) 3.5))
        (assert (= (select a 0) 3.5))
        (check-sat)
        """
        assert status(text) == "sat"

    def test_negative_literal_pin(self):
        text = """
        (declare-const a (Array Int Real))
        (assert (= (select a 0) (- 2.5)))
        (assert (< (select a 0) 0.0))
        (check-sat)
        """
        assert status(text) == "sat"

    def test_unpinned_cell_is_unknown(self):
        text = """
        (declare-const a (Array Int Real))
        (assert (< (select a 0) 1.0))
        (check-sat)
        """
        assert status(text) == "unknown"


class TestIntQuantifiers:
    def test_bounded_exists_hit(self):
        text = "(assert (exists ((n Int)) (and (and (<= 0 n) (<= n 5)) (= n 3)))) (check-sat)"
        assert status(text) == "sat"

    def test_bounded_exists_miss(self):
        text = "(assert (exists ((n Int)) (and (and (<= 0 n) (<= n 5)) (= n 9)))) (check-sat)"
        assert status(text) == "unsat"

    def test_unbounded_exists_unknown(self):
        assert status("(assert (exists ((n Int)) (< 0 n))) (check-sat)") == "unknown"

    def test_forall_over_range(self):
        text = "(assert (forall ((n Int)) (=> (and (<= 0 n) (<= n 3)) (< n 4)))) (check-sat)"
        assert status(text) == "sat"

    def test_forall_counterexample(self):
        text = "(assert (forall ((n Int)) (=> (and (<= 0 n) (<= n 3)) (< n 3)))) (check-sat)"
        assert status(text) == "unsat"

    def test_multiple_binders_peel(self):
        text = """
        (assert (exists ((a Int) (b Int))
          (and (and (<= 0 a) (<= a 2)) (and (and (<= 0 b) (<= b 2)) (= (+ a b) 4)))))
        (check-sat)
        """
        assert status(text) == "sat"

    def test_or_bound_hull(self):
        # bounds come from the hull of the disjuncts, 3 is outside both
        text = """
        (assert (exists ((n Int))
          (or (and (<= 0 n) (<= n 1)) (and (<= 5 n) (<= n 6)))))
        (check-sat)
        """
        assert status(text) == "sat"


class TestRealQuantifiers:
    def test_guarded_exists(self):
        text = """
        (assert (exists ((t Real)) (and (and (<= 0.0 t) (<= t 5.0)) (> t 4.5))))
        (check-sat)
        """
        assert status(text) == "sat"

    def test_empty_guard(self):
        text = """
        (assert (exists ((t Real)) (and (and (<= 3.0 t) (<= t 1.0)) (= t t))))
        (check-sat)
        """
        assert status(text) == "unsat"

    def test_equality_needs_root(self):
        # only the crossing of 2t = 7 at t = 3.5 satisfies the body
        text = """
        (assert (exists ((t Real)) (and (and (<= 0.0 t) (<= t 5.0)) (= (* 2.0 t) 7.0))))
        (check-sat)
        """
        assert status(text) == "sat"

    def test_narrow_band_needs_midpoint(self):
        text = """
        (assert (exists ((t Real)) (and (and (<= 0.0 t) (<= t 10.0))
          (and (> t 3.9) (< t 4.1)))))
        (check-sat)
        """
        assert status(text) == "sat"

    def test_zero_slope_is_constant(self):
        text = """
        (assert (exists ((t Real)) (and (and (<= 0.0 t) (<= t 10.0))
          (= (* 0.0 t) 7.77))))
        (check-sat)
        """
        assert status(text) == "unsat"

    def test_unbounded_tautology(self):
        assert status("(assert (exists ((r Real)) (= r r))) (check-sat)") == "sat"

    def test_forall_guarded(self):
        text = """
        (assert (forall ((t Real)) (=> (and (<= 0.0 t) (<= t 5.0)) (<= t 5.0))))
        (check-sat)
        """
        assert status(text) == "sat"

    def test_floor_pattern_grid_hit(self):
        # floor(t / 0.5) = 2 exactly on t in [1.0, 1.4]
        text = """
        (assert (exists ((t Real)) (and (and (<= 0.0 t) (<= t 1.4))
          (exists ((k Int)) (and (and (<= (* 0.5 (to_real k)) t)
                                      (< t (* 0.5 (to_real (+ k 1)))))
                                 (= k 2))))))
        (check-sat)
        """
        assert status(text) == "sat"

    def test_floor_pattern_grid_miss_stays_decided(self):
        # floor(t / 0.5) <= 2 throughout [0, 1.4]: k = 5 is impossible, and
        # the grid coverage keeps that a definite unsat rather than unknown
        text = """
        (assert (exists ((t Real)) (and (and (<= 0.0 t) (<= t 1.4))
          (exists ((k Int)) (and (and (<= (* 0.5 (to_real k)) t)
                                      (< t (* 0.5 (to_real (+ k 1)))))
                                 (= k 5))))))
        (check-sat)
        """
        assert status(text) == "unsat"

    def test_unclassifiable_body_degrades_to_unknown(self):
        # to_int breaks the piecewise analysis; the body is really never
        # true, but the honest answer without the analysis is unknown
        text = """
        (assert (exists ((t Real)) (and (and (<= 0.0 t) (<= t 1.0))
          (= (to_real (to_int t)) 0.5))))
        (check-sat)
        """
        assert status(text) == "unknown"


class TestCommands:
    def test_ignored_commands(self):
        text = """
        (set-logic AUFLIRA)
        (set-option :produce-models true)
        (set-info :status unknown)
        (push) (pop)
        (assert (= 1 1))
        (check-sat)
        (exit)
        """
        assert status(text) == "sat"

    def test_get_model_after_sat(self):
        out = run_script("(assert (= 1 1)) (check-sat) (get-model)")
        assert out == ["sat", "(model )"]

    def test_get_model_after_unsat_prints_nothing(self):
        out = run_script("(assert (= 1 2)) (check-sat) (get-model)")
        assert out == ["unsat"]

    def test_declare_fun_nullary(self):
        text = "(declare-fun x () Real) (assert (= x x)) (check-sat)"
        assert status(text) == "sat"

    def test_declare_fun_with_args_rejected(self):
        with pytest.raises(ShimError, match="uninterpreted functions"):
            run_script("(declare-fun f (Int) Real) (check-sat)")

    def test_unknown_command_rejected(self):
        with pytest.raises(ShimError, match="unsupported command"):
            run_script("(frobnicate)")

    def test_unknown_symbol_rejected(self):
        with pytest.raises(ShimError, match="unknown symbol"):
            run_script("(assert (= zork 1)) (check-sat)")


class TestMain:
    def test_reads_file(self, tmp_path, capsys):
        p = tmp_path / "q.smt2"
        p.write_text("(assert (= 1 1)) (check-sat)\n")
        assert shim.main([str(p)]) == 0
        assert capsys.readouterr().out == "sat\n"

    def test_missing_file(self, capsys):
        assert shim.main(["/nonexistent/q.smt2"]) == 1
        assert "cannot read script" in capsys.readouterr().err

    def test_parse_error_reported(self, tmp_path, capsys):
        p = tmp_path / "q.smt2"
        p.write_text("(assert (= 1 1)\n")
        assert shim.main([str(p)]) == 1
        assert "unbalanced" in capsys.readouterr().err

    def test_recursion_error_message(self, tmp_path, capsys, monkeypatch):
        def boom(_):
            raise RecursionError()

        monkeypatch.setattr(shim, "run_script", boom)
        p = tmp_path / "q.smt2"
        p.write_text("(check-sat)\n")
        assert shim.main([str(p)]) == 1
        assert "max. recursion depth exceeded" in capsys.readouterr().err

    def test_memory_error_message(self, tmp_path, capsys, monkeypatch):
        def boom(_):
            raise MemoryError()

        monkeypatch.setattr(shim, "run_script", boom)
        p = tmp_path / "q.smt2"
        p.write_text("(check-sat)\n")
        assert shim.main([str(p)]) == 1
        assert "out of memory" in capsys.readouterr().err

    def test_deep_evaluation_survives(self, tmp_path, capsys):
        # 5000-deep additions stay well within the worker's headroom
        limit = sys.getrecursionlimit()
        try:
            expr = "1"
            for _ in range(5000):
                expr = f"(+ 1 {expr})"
            p = tmp_path / "deep.smt2"
            p.write_text(f"(assert (= {expr} 5001)) (check-sat)\n")
            assert shim.main([str(p)]) == 0
            assert capsys.readouterr().out == "sat\n"
        finally:
            sys.setrecursionlimit(limit)


# --- end-to-end: translated scripts must land on the oracle's verdict ---

R1_GRID_MODE = FixedRate(Fraction(1, 5))


class TestTranslatedScripts:
    """The scripts assert the negation, so satisfied means unsat.

    Expected statuses are hand-derived from the seven-record fixture
    (values 20.1, 22.2, 23.3, 20.4, 21.1, 3.2, 1.1 at times 0, 0.2, 0.9,
    1.8, 3.0, 4.9, 5.7; mode 0, 1, 0, 0, 3, 3, 3) and double-checked
    against the direct evaluator in test_semantics.
    """

    @pytest.mark.parametrize(
        "text,want",
        [
            # ang-rate at 3, 4, 5 is 20.4, 21.1, 3.2: never below 2.5
            ("exists σ0 in [3,5] such that (ang-rate @i σ0) < 2.5", "sat"),
            # widening to 6 reaches 1.1
            ("exists σ0 in [3,6] such that (ang-rate @i σ0) < 2.5", "unsat"),
            # only σ0 = 3 has mode 0 followed by mode 3; ang-rate drops
            # below 1.5 at τ0 = 3.9 (time 5.7, value 1.1)
            (
                "forall σ0 in [0,5] such that ((mode @i σ0) = 0 and "
                "(mode @i (σ0 + 1)) = 3) implies exists τ0 in [0,10] such that "
                "(ang-rate @t (τ0 + i2t(σ0))) < 1.5",
                "unsat",
            ),
            (
                "not (forall σ0 in [0,5] such that ((mode @i σ0) = 0 and "
                "(mode @i (σ0 + 1)) = 3) implies exists τ0 in [0,10] such that "
                "(ang-rate @t (τ0 + i2t(σ0))) < 1.5)",
                "sat",
            ),
            # reading at τ0 + 1.0 hits 23.3 (time 0.9) once τ0 = 0
            ("exists τ0 in [0.0, 4.0] such that (ang-rate @t (τ0 + 1.0)) > 23.0", "unsat"),
            # ι(2.5) = 3, so the read equals 20.4 on [1.8, 3.0)
            ("exists τ0 in [2.0, 3.0] such that (ang-rate @t τ0) = 20.4", "unsat"),
            # open interval just below the last record never reaches 1.1
            ("exists τ0 in (5.69, 5.7) such that (ang-rate @t τ0) < 2.0", "sat"),
            ("forall σ0 in [4,6] such that (mode @i σ0) = 3", "unsat"),
            ("forall σ0 in [0,6] such that (mode @i σ0) = 3", "sat"),
            # ι(2.5) on the variable-rate fixture is 3
            ("t2i(2.5) = 3", "unsat"),
            ("t2i(2.5) = 4", "sat"),
        ],
    )
    def test_variable_rate(self, fig_trace, text, want):
        f = parse(text, signature=tuple(fig_trace.signals))
        script = translate(fig_trace, f)
        assert run_script(script.text)[0] == want

    @pytest.mark.parametrize(
        "text,want",
        [
            # the resampled grid steps by 0.2 from 0 to 5.6 (29 records);
            # the mode switch 0 -> 3 happens between grid indices 14 and 15
            # which lies outside [0,5], so the rule holds vacuously
            (
                "forall σ0 in [0,5] such that ((mode @i σ0) = 0 and "
                "(mode @i (σ0 + 1)) = 3) implies exists τ0 in [0,10] such that "
                "(ang-rate @t (τ0 + i2t(σ0))) < 1.5",
                "unsat",
            ),
            # floor(2.5 / 0.2) = 12
            ("t2i(2.5) = 12", "unsat"),
            ("t2i(2.5) = 13", "sat"),
            # linear interpolation keeps ang-rate at 2.9375 on grid index
            # 25 (time 5.0), so [15,25] never dips below 2.5 ...
            ("exists σ0 in [15,25] such that (ang-rate @i σ0) < 2.5", "sat"),
            # ... while index 26 (time 5.2) reads 2.4125
            ("exists σ0 in [15,26] such that (ang-rate @i σ0) < 2.5", "unsat"),
        ],
    )
    def test_fixed_rate_grid(self, fig_trace, text, want):
        grid = apply_a2(fig_trace, PreprocessConfig())
        f = parse(text, signature=tuple(grid.signals))
        script = translate(grid, f, mode=R1_GRID_MODE)
        assert isinstance(script.iota_mode, FixedRate)
        assert run_script(script.text)[0] == want

    def test_fixed_and_variable_iota_agree_on_grid(self, fig_trace):
        grid = apply_a2(fig_trace, PreprocessConfig())
        for text in ("t2i(3.14) = 15", "t2i(0.0) = 0", "t2i(5.6) = 28"):
            f = parse(text, signature=tuple(grid.signals))
            fixed = run_script(translate(grid, f, mode=R1_GRID_MODE).text)
            variable = run_script(translate(grid, f, mode=VariableRate()).text)
            assert fixed == variable == ["unsat"]  # unsat scripts print no model

    def test_unassigned_cells_stay_unknown(self, fig_trace):
        from tracecheck.trace import Record, Trace, Variable

        records = [
            Record(0, Fraction(0), {"x": Fraction(1)}),
            Record(1, Fraction(1), {}),
        ]
        holey = Trace(records, signals=("x",), rate=Variable())
        f = parse("forall σ0 in [0,1] such that (x @i σ0) > 0.0", signature=("x",))
        script = translate(holey, f)
        assert run_script(script.text) == ["unknown"]  # nothing after unknown
