import pytest

from augviz.dataflow import DataflowTrace, ingest
from augviz.errors import EmptyDomainError, NonNumericDomainError
from augviz.scales import resolve_scale, resolve_scale_extended
from augviz.specmodel import DataRef, DatasetDecl, ScaleDecl

from oracles import band_position_oracle


def trace_of(rows, name="t"):
    cols = sorted(rows[0].keys()) if rows else []
    table = ingest(DatasetDecl(name, cols, []), rows)
    return {name: DataflowTrace(name, table)}


def test_linear_mapping():
    s = resolve_scale(ScaleDecl("y", "linear", [0, 10], [0, 100]), {})
    assert s.apply(5) == 50
    assert s.apply(0) == 0
    assert s.apply(12) == 120  # no clamping: the range clip just extends


def test_linear_reversed_range():
    s = resolve_scale(ScaleDecl("y", "linear", [0, 10], [200, 0]), {})
    assert s.apply(0) == 200
    assert s.apply(10) == 0


def test_band_formula_from_spec():
    s = resolve_scale(ScaleDecl("x", "band", ["A", "B"], [0, 100], 0.1, 0.05), {})
    assert s.step == pytest.approx(100 / (2 - 0.1 + 2 * 0.05))
    assert s.step == pytest.approx(50)
    assert s.apply("A") == pytest.approx(2.5)
    assert s.bandwidth == pytest.approx(45)
    # independent evaluation of the published formula
    pos, bw = band_position_oracle(2, 0, 0, 100, 0.1, 0.05)
    assert s.apply("A") == pytest.approx(pos)
    assert s.bandwidth == pytest.approx(bw)


def test_band_positions_strictly_increase():
    s = resolve_scale(ScaleDecl("x", "band", list("ABCDE"), [10, 310], 0.1, 0.05), {})
    xs = [s.apply(c) for c in "ABCDE"]
    assert xs == sorted(xs)
    assert all(b > a for a, b in zip(xs, xs[1:]))


def test_point_scale():
    s = resolve_scale(ScaleDecl("x", "point", ["a", "b", "c"], [0, 100], None, 0.0), {})
    assert [s.apply(v) for v in "abc"] == [0, 50, 100]
    s1 = resolve_scale(ScaleDecl("x", "point", ["only"], [0, 100], None, 0.0), {})
    assert s1.apply("only") == 50


def test_data_driven_linear_domain():
    traces = trace_of([{"v": 4}, {"v": 9}, {"v": 6}])
    s = resolve_scale(ScaleDecl("y", "linear",
                                DataRef("t", "v"), [0, 100]), traces)
    assert s.domain == [4.0, 9.0]


def test_data_driven_band_first_appearance_order():
    traces = trace_of([{"k": "z"}, {"k": "a"}, {"k": "z"}, {"k": "m"}])
    s = resolve_scale(ScaleDecl("x", "band", DataRef("t", "k"), [0, 90]), traces)
    assert s.domain == ["z", "a", "m"]


def test_empty_domain():
    traces = trace_of([])
    traces["t"].input.columns = ["v"]
    with pytest.raises(EmptyDomainError):
        resolve_scale(ScaleDecl("y", "linear", DataRef("t", "v"), [0, 1]), traces)


def test_non_numeric_domain():
    traces = trace_of([{"v": "oops"}])
    with pytest.raises(NonNumericDomainError):
        resolve_scale(ScaleDecl("y", "linear", DataRef("t", "v"), [0, 1]), traces)


def test_ordinal_palette_cycling():
    s = resolve_scale(ScaleDecl("c", "ordinal", list(range(12)), "palette"), {})
    assert s.apply(0) == s.apply(10)  # 10-color palette wraps
    assert s.apply(0) != s.apply(1)


def test_extend_growth_keeps_base_positions():
    decl = ScaleDecl("x", "band", DataRef("t", "k"), [0, 100], 0.1, 0.05)
    base = resolve_scale(decl, trace_of([{"k": "A"}, {"k": "B"}]))
    grown = resolve_scale_extended(
        decl, base, trace_of([{"k": "A"}, {"k": "B"}, {"k": "C"}]))
    assert grown.step == base.step
    assert grown.bandwidth == base.bandwidth
    for v in ("A", "B"):
        assert grown.apply(v) == base.apply(v)
    assert grown.apply("C") == pytest.approx(base.apply("B") + base.step)
    # range grew by exactly one step
    assert grown.r1 - base.r1 == pytest.approx(base.step)


def test_extend_linear_rescales_when_auto_domain_grows():
    decl = ScaleDecl("y", "linear", DataRef("t", "v"), [0, 100])
    base = resolve_scale(decl, trace_of([{"v": 0}, {"v": 10}]))
    grown = resolve_scale_extended(
        decl, base, trace_of([{"v": 0}, {"v": 10}, {"v": 20}]))
    assert grown.slope == pytest.approx(base.slope / 2)
