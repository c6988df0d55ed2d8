import math
import random

import pytest

from augviz import AUGMENT_PID_BASE, append_rows, apply_transform, ingest, run_pipeline
from augviz.errors import (
    CyclicHierarchyError,
    DuplicateNodeIdError,
    HeterogeneousRowsError,
    MissingFieldError,
    PipelineError,
)
from augviz.specmodel import DatasetDecl, TransformDecl, parse_spec

import oracles

TOL = 1e-9


def decl(name="t", columns=None):
    return DatasetDecl(name, columns or [], [])


def table(rows, columns=None, name="t"):
    cols = columns or (list(rows[0].keys()) if rows else [])
    return ingest(decl(name, cols), rows)


def t(kind, **params):
    return TransformDecl(kind, params)


# --- ingest ---------------------------------------------------------------

def test_ingest_sequential_pids():
    tb = table([{"cat": "A", "v": 1}, {"cat": "B", "v": 3}])
    assert tb.pids() == [1, 2]
    assert [r.tag for r in tb.rows] == ["base", "base"]


def test_ingest_empty_with_declared_columns():
    tb = ingest(decl("t", ["cat", "v"]), [], "augment")
    assert tb.rows == []
    assert tb.columns == ["cat", "v"]


def test_append_pid_offset():
    tb = table([{"v": 1}, {"v": 2}, {"v": 3}])
    tb2 = append_rows(tb, [{"v": 4}, {"v": 5}])
    assert tb2.pids() == [1, 2, 3, AUGMENT_PID_BASE, AUGMENT_PID_BASE + 1]
    assert tb2.pids()[3] == 4294967296
    assert [r.tag for r in tb2.rows[3:]] == ["augment", "augment"]


def test_ingest_heterogeneous_rows():
    with pytest.raises(HeterogeneousRowsError):
        table([{"v": 1}, {"w": 2}], columns=["v"])


# --- row-level transforms ---------------------------------------------------

def test_filter_preserves_pids_and_order():
    tb = table([{"v": 5}, {"v": 20}, {"v": 11}])
    out = apply_transform(t("filter", expr="datum.v > 10"), tb)
    assert out.pids() == [2, 3]
    assert [r.cells["v"] for r in out.rows] == [20, 11]


def test_formula_adds_column():
    tb = table([{"v": 2}])
    out = apply_transform(t("formula", expr="datum.v * 10", **{"as": "big"}), tb)
    assert out.columns == ["v", "big"]
    assert out.rows[0].cells["big"] == 20


def test_sort_stable():
    tb = table([{"k": "x", "v": 2}, {"k": "y", "v": 1}, {"k": "z", "v": 2}])
    out = apply_transform(t("sort", field="v"), tb)
    assert [r.cells["k"] for r in out.rows] == ["y", "x", "z"]
    assert out.pids() == [2, 1, 3]


def test_missing_field_error():
    with pytest.raises(MissingFieldError):
        apply_transform(t("sort", field="zz"), table([{"v": 1}]))


# --- aggregate ---------------------------------------------------------------

def test_aggregate_example():
    tb = table([{"cat": "A", "v": 1}, {"cat": "A", "v": 2}, {"cat": "B", "v": 3}])
    out = apply_transform(
        t("aggregate", groupby=["cat"], ops=["sum"], fields=["v"], **{"as": ["sum_v"]}), tb)
    assert [(r.cells["cat"], r.cells["sum_v"]) for r in out.rows] == \
        [("A", 3.0), ("B", 3.0)]


def test_aggregate_pid_stable_across_runs():
    tb = table([{"cat": "A", "v": 1}, {"cat": "B", "v": 2}])
    agg = t("aggregate", groupby=["cat"], ops=["count"], fields=["v"])
    out1 = apply_transform(agg, tb)
    out2 = apply_transform(agg, tb)
    assert out1.pids() == out2.pids()
    assert all(p > 0 for p in out1.pids())


def test_aggregate_source_tag_rule():
    tb = table([{"cat": "A", "v": 1}, {"cat": "B", "v": 2}])
    tb = append_rows(tb, [{"cat": "B", "v": 5}, {"cat": "C", "v": 1}])
    out = apply_transform(
        t("aggregate", groupby=["cat"], ops=["sum"], fields=["v"]), tb)
    tags = {r.cells["cat"]: r.tag for r in out.rows}
    assert tags == {"A": "base", "B": "augment", "C": "augment"}


def test_aggregate_source_tag_rule_randomized():
    rng = random.Random(3)
    for _ in range(30):
        rows = [{"cat": rng.choice("ABC"), "v": rng.randrange(10)}
                for _ in range(rng.randrange(1, 12))]
        aug = [{"cat": rng.choice("ABCD"), "v": rng.randrange(10)}
               for _ in range(rng.randrange(0, 5))]
        tb = append_rows(table(rows, columns=["cat", "v"]), aug)
        out = apply_transform(
            t("aggregate", groupby=["cat"], ops=["count"], fields=["v"]), tb)
        for r in out.rows:
            members = [m for m in tb.rows if m.cells["cat"] == r.cells["cat"]]
            expect = "base" if all(m.tag == "base" for m in members) else "augment"
            assert r.tag == expect


# --- pie / stack / bin against independent oracles ---------------------------

def test_pie_spec_example():
    tb = table([{"v": 1}, {"v": 1}, {"v": 2}])
    out = apply_transform(t("pie", field="v"), tb)
    angles = [(r.cells["startAngle"], r.cells["endAngle"]) for r in out.rows]
    expect = [(0, math.pi / 2), (math.pi / 2, math.pi), (math.pi, 2 * math.pi)]
    for (a0, a1), (e0, e1) in zip(angles, expect):
        assert abs(a0 - e0) <= TOL and abs(a1 - e1) <= TOL


def test_stack_groups_prefix_sums():
    tb = table([{"g": "a", "v": 1}, {"g": "b", "v": 5},
                {"g": "a", "v": 2}, {"g": "a", "v": 3}])
    out = apply_transform(t("stack", groupby=["g"], field="v"), tb)
    got = [(r.cells["y0"], r.cells["y1"]) for r in out.rows]
    assert got == [(0, 1), (0, 5), (1, 3), (3, 6)]


def test_transform_oracles_random_tables():
    rng = random.Random(11)
    for _ in range(100):
        n = rng.randrange(1, 50)
        rows = [{"cat": rng.choice("ABCD"),
                 "v": rng.randrange(0, 400) / 4,
                 "w": rng.randrange(1, 80) / 4} for _ in range(n)]
        tb = table(rows, columns=["cat", "v", "w"])

        out = apply_transform(
            t("aggregate", groupby=["cat"], ops=["sum", "mean", "min", "max", "count"],
              fields=["v", "v", "w", "w", "v"],
              **{"as": ["s", "m", "lo", "hi", "n"]}), tb)
        expect = oracles.agg_oracle(rows, ["cat"], ["sum", "mean", "min", "max", "count"],
                                    ["v", "v", "w", "w", "v"],
                                    ["s", "m", "lo", "hi", "n"])
        assert len(out.rows) == len(expect)
        for r, e in zip(out.rows, expect):
            for k, v in e.items():
                got = r.cells[k]
                if isinstance(v, float):
                    assert abs(got - v) <= TOL * max(1.0, abs(v)), k
                else:
                    assert got == v, k

        out = apply_transform(t("stack", groupby=["cat"], field="v"), tb)
        expect = oracles.stack_oracle(rows, ["cat"], "v")
        for r, e in zip(out.rows, expect):
            assert abs(r.cells["y0"] - e["y0"]) <= TOL
            assert abs(r.cells["y1"] - e["y1"]) <= TOL

        out = apply_transform(t("pie", field="v"), tb)
        expect = oracles.pie_oracle([r["v"] for r in rows])
        for r, (e0, e1) in zip(out.rows, expect):
            assert abs(r.cells["startAngle"] - e0) <= TOL
            assert abs(r.cells["endAngle"] - e1) <= TOL

        maxbins = rng.choice([5, 10, 20])
        out = apply_transform(t("bin", field="v", extent="auto", maxbins=maxbins), tb)
        expect = oracles.bin_oracle([r["v"] for r in rows], "auto", maxbins)
        for r, (b0, b1) in zip(out.rows, expect):
            assert abs(r.cells["bin0"] - b0) <= TOL
            assert abs(r.cells["bin1"] - b1) <= TOL


# --- hierarchy / layouts ------------------------------------------------------

def tree_rows():
    return [
        {"id": "r", "parent": None, "w": 0},
        {"id": "a", "parent": "r", "w": 2},
        {"id": "b", "parent": "r", "w": 6},
        {"id": "c", "parent": "b", "w": 2},
        {"id": "d", "parent": "b", "w": 4},
    ]


def test_hierarchy_columns():
    out = apply_transform(t("hierarchy", idField="id", parentField="parent"),
                          table(tree_rows()))
    got = {r.cells["id"]: (r.cells["depth"], r.cells["childCount"])
           for r in out.rows}
    assert got == {"r": (0, 2), "a": (1, 0), "b": (1, 2), "c": (2, 0), "d": (2, 0)}


def test_hierarchy_cycle_and_duplicates():
    rows = [{"id": "a", "parent": "b"}, {"id": "b", "parent": "a"}]
    with pytest.raises(CyclicHierarchyError):
        apply_transform(t("hierarchy", idField="id", parentField="parent"),
                        table(rows))
    rows = [{"id": "a", "parent": None}, {"id": "a", "parent": None}]
    with pytest.raises(DuplicateNodeIdError):
        apply_transform(t("hierarchy", idField="id", parentField="parent"),
                        table(rows))


def test_treelayout_tidy_positions():
    out = apply_transform(
        t("treelayout", method="tidy", idField="id", parentField="parent",
          size=[400, 200], levelGap=50, leafStep=24), table(tree_rows()))
    got = {r.cells["id"]: (r.cells["x"], r.cells["y"]) for r in out.rows}
    # leaves a, c, d get indexes 0, 1, 2
    assert got["a"] == (0, 50)
    assert got["c"] == (24, 100)
    assert got["d"] == (48, 100)
    assert got["b"] == (36, 50)       # mean of children
    assert got["r"] == (18, 0)        # mean of a (0) and b (36)


def test_treelayout_cluster_scales_by_max_depth():
    out = apply_transform(
        t("treelayout", method="cluster", idField="id", parentField="parent",
          size=[400, 200], leafStep=24), table(tree_rows()))
    got = {r.cells["id"]: r.cells["y"] for r in out.rows}
    assert got["r"] == 0
    assert got["a"] == 100.0   # depth 1 of maxDepth 2
    assert got["c"] == 200.0


def test_treemap_slice_dice():
    out = apply_transform(
        t("treemap", valueField="w", idField="id", parentField="parent",
          size=[100, 100]), table(tree_rows()))
    got = {r.cells["id"]: (r.cells["x0"], r.cells["y0"], r.cells["x1"], r.cells["y1"])
           for r in out.rows}
    assert got["r"] == (0, 0, 100, 100)
    # depth-0 children split x by value 2:6
    assert got["a"] == (0, 0, 25, 100)
    assert got["b"] == (25, 0, 100, 100)
    # b's children split y by 2:4
    assert got["c"] == pytest.approx((25, 0, 100, 100 * 2 / 6))
    assert got["d"][1] == pytest.approx(100 * 2 / 6)


# --- run_pipeline -------------------------------------------------------------

def _spec(text):
    return parse_spec(text)


def test_run_pipeline_snapshots():
    spec = _spec('{"width": 10, "height": 10, "data": [{"name": "t",'
                 '"values": [{"v": 1}, {"v": 20}, {"v": 30}],'
                 '"transform": [{"kind": "filter", "expr": "datum.v > 5"},'
                 '{"kind": "aggregate", "groupby": [], "ops": ["sum"],'
                 '"fields": ["v"], "as": ["s"]}]}]}')
    tables = {"t": table([{"v": 1}, {"v": 20}, {"v": 30}])}
    traces = run_pipeline(spec, tables)
    trace = traces["t"]
    assert len(trace.stages) == 2
    assert trace.stages[0].output.pids() == [2, 3]
    assert trace.stages[1].output.rows[0].cells["s"] == 50.0
    # snapshots are isolated: rerun is structurally identical
    again = run_pipeline(spec, tables)["t"]
    assert again.stages[0].output.pids() == trace.stages[0].output.pids()
    assert again.stages[1].output.rows[0].cells == trace.stages[1].output.rows[0].cells


def test_empty_pipeline_echoes_input():
    spec = _spec('{"width": 10, "height": 10, "data": [{"name": "t",'
                 '"values": [{"v": 1}]}]}')
    traces = run_pipeline(spec, {"t": table([{"v": 1}])})
    assert traces["t"].stages == []
    assert traces["t"].final.pids() == [1]


def test_pipeline_error_carries_stage_index():
    spec = _spec('{"width": 10, "height": 10, "data": [{"name": "t",'
                 '"values": [{"v": 1}],'
                 '"transform": [{"kind": "filter", "expr": "datum.v > 0"},'
                 '{"kind": "sort", "field": "zz"}]}]}')
    with pytest.raises(PipelineError) as exc:
        run_pipeline(spec, {"t": table([{"v": 1}])})
    assert exc.value.stage_index == 1
    assert exc.value.dataset == "t"


def test_provenance_preservation_random_pipelines():
    rng = random.Random(5)
    kinds = [t("filter", expr="datum.v > 10"),
             t("formula", expr="datum.v * 2", **{"as": "d"}),
             t("sort", field="v"),
             t("stack", groupby=["cat"], field="v"),
             t("pie", field="v"),
             t("bin", field="v", extent="auto", maxbins=10)]
    for _ in range(40):
        rows = [{"cat": rng.choice("AB"), "v": rng.randrange(0, 100)}
                for _ in range(rng.randrange(1, 20))]
        tb = table(rows, columns=["cat", "v"])
        current = tb
        for tr in rng.sample(kinds, rng.randrange(1, 4)):
            out = apply_transform(tr, current)
            in_pids = current.pids()
            out_pids = out.pids()
            assert set(out_pids) <= set(in_pids)
            if tr.kind != "sort":  # sort reorders by design (stably)
                order = [p for p in in_pids if p in set(out_pids)]
                assert out_pids == order
            current = out
