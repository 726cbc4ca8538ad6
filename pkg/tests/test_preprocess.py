"""Preprocessing: filtering, A1/A2 strategies, exact interpolation."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tracecheck.preprocess import (
    Interpolant,
    InterpolationKind,
    PreprocessConfig,
    PreprocessError,
    apply_a1,
    apply_a2,
    config_from_keys,
    filter_unused,
    interpolate,
    parse_keyvalues,
)
from tracecheck.trace import Fixed, Variable, classify_rate, load_trace

CONST = InterpolationKind.CONSTANT
LINEAR = InterpolationKind.LINEAR
CUBIC = InterpolationKind.CUBIC


class TestInterpolate:
    def test_constant_holds_previous(self):
        assert interpolate(CONST, [(0, 5), (2, 7)], Fraction("1.9")) == 5

    def test_linear_proportional(self):
        assert interpolate(LINEAR, [(0, 0), (4, 8)], 3) == 6

    def test_cubic_passes_through_knots(self):
        samples = [(0, 0), (1, 1), (2, 0), (3, 1)]
        for x, y in samples:
            assert interpolate(CUBIC, samples, x) == y

    def test_boundary_clamps_to_nearest_sample(self):
        samples = [(1, 10), (2, 20)]
        for kind in InterpolationKind:
            assert interpolate(kind, samples, 0) == 10
            assert interpolate(kind, samples, 5) == 20

    def test_single_sample_is_constant_everywhere(self):
        for kind in InterpolationKind:
            assert interpolate(kind, [(3, 42)], 0) == 42
            assert interpolate(kind, [(3, 42)], 9) == 42

    def test_two_sample_cubic_degenerates_to_linear(self):
        assert interpolate(CUBIC, [(0, 0), (4, 8)], 3) == 6

    def test_non_increasing_samples_rejected(self):
        with pytest.raises(PreprocessError):
            interpolate(LINEAR, [(0, 1), (0, 2)], 0)

    @given(
        xs=st.lists(st.integers(0, 60), min_size=3, max_size=8, unique=True),
        ys=st.lists(st.integers(-20, 20), min_size=8, max_size=8),
        num=st.integers(0, 240),
    )
    @settings(max_examples=60, deadline=None)
    def test_cubic_matches_scipy_pchip(self, xs, ys, num):
        from scipy.interpolate import PchipInterpolator

        xs = sorted(xs)
        ys = ys[: len(xs)]
        f = Interpolant(CUBIC, list(zip(map(Fraction, xs), map(Fraction, ys))))
        ref = PchipInterpolator(xs, ys)
        t = Fraction(num, 4)
        t = max(Fraction(xs[0]), min(Fraction(xs[-1]), t))
        ours = float(f.at(t))
        theirs = float(ref(float(t)))
        assert ours == pytest.approx(theirs, rel=1e-9, abs=1e-9)

    @given(
        ys=st.lists(st.integers(0, 50), min_size=4, max_size=8),
        num=st.integers(0, 100),
    )
    @settings(max_examples=60, deadline=None)
    def test_monotone_data_stays_monotone(self, ys, num):
        ys = sorted(ys)
        samples = [(Fraction(i), Fraction(y)) for i, y in enumerate(ys)]
        hi = Fraction(len(ys) - 1)
        a = Fraction(num, 100) * hi
        b = min(a + Fraction(1, 7), hi)
        for kind in InterpolationKind:
            f = Interpolant(kind, samples)
            assert f.at(a) <= f.at(b)


class TestFilterUnused:
    def test_rows_assigning_only_unused_dropped(self):
        trace = load_trace(
            "timestamp,a,b\n0,1,\n1,,9\n2,2,\n3,,8\n4,3,7\n"
        )
        out = filter_unused(trace, {"a"})
        assert out.last_index == 2
        assert out.signals == ("a",)
        assert [r.timestamp for r in out.records] == [0, 2, 4]
        assert [r.values["a"] for r in out.records] == [1, 2, 3]
        assert [r.index for r in out.records] == [0, 1, 2]

    def test_all_signals_used_is_identity(self, fig_trace):
        out = filter_unused(fig_trace, set(fig_trace.signals))
        assert out.records == fig_trace.records

    def test_empty_result_is_error(self):
        trace = load_trace("timestamp,a,b\n0,,1\n1,,2\n")
        with pytest.raises(PreprocessError, match="no relevant records"):
            filter_unused(trace, {"a"})

    def test_unknown_used_signal_is_error(self, fig_trace):
        with pytest.raises(PreprocessError, match="not in trace"):
            filter_unused(fig_trace, {"mode", "altitude"})


class TestApplyA1:
    # Hand-derived expectations for the 6-row fixture (the spreadsheet oracle):
    # x assigned at t=1 (10) and t=4 (16).
    #   linear:   t=0 -> 10 (clamp), t=2 -> 10+6*(1/3)=12, t=3 -> 14, t=5 -> 16
    #   constant: t=0 -> 10 (clamp), t=2 -> 10, t=3 -> 10, t=5 -> 16
    SIX_ROWS = "timestamp,x,y\n0,,1\n1,10,2\n2,,3\n3,,4\n4,16,5\n5,,6\n"

    def test_linear_fill(self):
        trace = load_trace(self.SIX_ROWS)
        out = apply_a1(trace, PreprocessConfig(strategy="A1", default_kind=LINEAR))
        assert [r.values["x"] for r in out.records] == [10, 10, 12, 14, 16, 16]

    def test_constant_fill(self):
        trace = load_trace(self.SIX_ROWS)
        out = apply_a1(
            trace, PreprocessConfig(strategy="A1", per_signal={"x": CONST})
        )
        assert [r.values["x"] for r in out.records] == [10, 10, 10, 10, 16, 16]

    def test_simple_midpoint_examples(self):
        trace = load_trace("timestamp,s\n0,1.0\n1,\n2,3.0\n")
        linear = apply_a1(trace, PreprocessConfig(default_kind=LINEAR))
        assert linear.records[1].values["s"] == 2
        held = apply_a1(trace, PreprocessConfig(per_signal={"s": CONST}))
        assert held.records[1].values["s"] == 1

    def test_preserves_count_timestamps_and_assigned_values(self, fig_trace):
        out = apply_a1(fig_trace, PreprocessConfig())
        assert len(out) == len(fig_trace)
        assert out.timestamps == fig_trace.timestamps
        assert out.records == fig_trace.records  # fig trace is already total

    def test_never_assigned_signal_is_error(self):
        trace = load_trace("timestamp,a,b\n0,1,\n1,2,\n")
        with pytest.raises(PreprocessError, match="'b' has no assigned samples"):
            apply_a1(trace, PreprocessConfig())


class TestApplyA2:
    def test_fig_trace_sr_is_min_gap(self, fig_trace):
        out = apply_a2(fig_trace, PreprocessConfig())
        assert out.rate == Fixed(Fraction("0.2"))
        assert classify_rate(out) == Fixed(Fraction("0.2"))
        # grid 0, 0.2, ..., 5.6: the off-grid t_m=5.7 is dropped
        assert out.timestamps[0] == 0
        assert out.timestamps[-1] == Fraction("5.6")
        assert len(out) == 29

    def test_fig_trace_interpolated_value(self, fig_trace):
        out = apply_a2(fig_trace, PreprocessConfig(default_kind=LINEAR))
        # t=0.4 sits 2/7 of the way from (0.2, 22.2) to (0.9, 23.3)
        expected = Fraction("22.2") + (Fraction("23.3") - Fraction("22.2")) * Fraction(2, 7)
        assert out.records[2].values["ang-rate"] == expected

    def test_mode_hold_keeps_integers(self, fig_trace):
        out = apply_a2(fig_trace, PreprocessConfig(per_signal={"mode": CONST}))
        modes = [r.values["mode"] for r in out.records]
        assert set(modes) <= {0, 1, 3}
        assert modes[0] == 0 and modes[1] == 1 and modes[15] == 3

    def test_already_fixed_total_trace_is_identity(self):
        trace = load_trace("timestamp,a\n0,1\n0.5,2\n1.0,4\n1.5,0\n")
        out = apply_a2(trace, PreprocessConfig())
        assert out.records == trace.records
        assert out.rate == Fixed(Fraction(1, 2))

    def test_two_record_trace_keeps_endpoints(self):
        trace = load_trace("timestamp,a\n0,0\n1,10\n")
        out = apply_a2(trace, PreprocessConfig(default_kind=LINEAR))
        assert [(r.timestamp, r.values["a"]) for r in out.records] == [(0, 0), (1, 10)]

    def test_single_record_rejected(self):
        trace = load_trace("timestamp,a\n0,1\n")
        with pytest.raises(PreprocessError, match="at least 2"):
            apply_a2(trace, PreprocessConfig())

    def test_degenerate_rate_rejected(self):
        trace = load_trace("timestamp,a\n0,1\n0.0000000000001,2\n1,3\n")
        with pytest.raises(PreprocessError, match="degenerate sample rate"):
            apply_a2(trace, PreprocessConfig())

    @given(
        gaps=st.lists(st.integers(1, 10), min_size=1, max_size=6),
        vals=st.lists(st.integers(-5, 5), min_size=7, max_size=7),
    )
    @settings(max_examples=40, deadline=None)
    def test_output_always_classifies_fixed(self, gaps, vals):
        rows = ["timestamp,a"]
        t = Fraction(0)
        rows.append(f"0,{vals[0]}")
        for i, g in enumerate(gaps):
            t += Fraction(g, 10)
            rows.append(f"{float(t)},{vals[i + 1]}")
        trace = load_trace("\n".join(rows) + "\n")
        out = apply_a2(trace, PreprocessConfig())
        assert isinstance(classify_rate(out), Fixed)
        assert classify_rate(out).sr == min(Fraction(g, 10) for g in gaps)


class TestConfigFile:
    def test_parse_and_build(self):
        text = """
        # kinds per signal
        strategy = A1
        default = cubic
        mode = constant
        ang-rate = linear
        solver.cmd = z3 -smt2
        """
        keys = parse_keyvalues(text)
        cfg = config_from_keys(keys)
        assert cfg.strategy == "A1"
        assert cfg.default_kind == CUBIC
        assert cfg.per_signal == {"mode": CONST, "ang-rate": LINEAR}
        assert keys["solver.cmd"] == "z3 -smt2"

    def test_bad_kind_rejected(self):
        with pytest.raises(PreprocessError, match="unknown interpolation kind"):
            config_from_keys({"default": "quadratic"})

    def test_bad_strategy_rejected(self):
        with pytest.raises(PreprocessError, match="strategy"):
            config_from_keys({"strategy": "A3"})

    def test_missing_equals_rejected(self):
        with pytest.raises(PreprocessError, match="line 1"):
            parse_keyvalues("just words")
