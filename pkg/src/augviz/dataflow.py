"""Transform pipelines over provenance-tracked tables.

Every row carries a provenance id that survives row-level transforms, so the
validator can restrict an augmented run to the rows the static layer was
built from. Aggregate outputs get a stable hash of their group key, making
group rows comparable across runs without positional matching.
"""

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field

from .errors import (
    CyclicHierarchyError,
    DanglingParentError,
    DuplicateNodeIdError,
    HeterogeneousRowsError,
    MissingFieldError,
    PipelineError,
    UnknownFieldRefError,
)
from .expr import eval_expr, parse_expr
from .specmodel import DatasetDecl, Spec, TransformDecl

#: First provenance id handed to appended (augment) rows.
AUGMENT_PID_BASE = 2 ** 32

#: Transform kinds whose output rows keep their input row's provenance id.
ROW_LEVEL_KINDS = ("filter", "formula", "sort", "stack", "pie", "bin")
LAYOUT_KINDS = ("hierarchy", "treelayout", "treemap")


@dataclass
class Row:
    pid: int
    tag: str  # "base" | "augment"
    cells: dict

    def copy(self) -> "Row":
        return Row(self.pid, self.tag, dict(self.cells))


@dataclass
class DataTable:
    name: str
    columns: list[str]
    rows: list[Row] = field(default_factory=list)

    def copy(self) -> "DataTable":
        return DataTable(self.name, list(self.columns),
                         [r.copy() for r in self.rows])

    def column(self, name: str) -> list:
        return [r.cells[name] for r in self.rows]

    def pids(self) -> list[int]:
        return [r.pid for r in self.rows]


@dataclass
class Stage:
    transform: TransformDecl
    output: DataTable


@dataclass
class DataflowTrace:
    dataset: str
    input: DataTable
    stages: list[Stage] = field(default_factory=list)

    @property
    def final(self) -> DataTable:
        return self.stages[-1].output if self.stages else self.input


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def ingest(decl: DatasetDecl, rows: list[dict], tag: str = "base") -> DataTable:
    """Build a table from inline rows; pids are sequential per source tag."""
    columns = list(decl.columns) if decl.columns else (
        list(rows[0].keys()) if rows else [])
    start = 1 if tag == "base" else AUGMENT_PID_BASE
    table = DataTable(decl.name, columns)
    for i, raw in enumerate(rows):
        if set(raw) != set(columns):
            raise HeterogeneousRowsError(i, f"dataset '{decl.name}'")
        table.rows.append(Row(start + i, tag, {c: raw[c] for c in columns}))
    return table


def append_rows(table: DataTable, rows: list[dict]) -> DataTable:
    """Return a copy of `table` with augment-tagged rows appended."""
    out = table.copy()
    for i, raw in enumerate(rows):
        if set(raw) != set(table.columns):
            raise HeterogeneousRowsError(i, f"dataset '{table.name}' append")
        out.rows.append(Row(AUGMENT_PID_BASE + i, "augment",
                            {c: raw[c] for c in table.columns}))
    return out


def group_pid(key: tuple) -> int:
    """Stable uint64 identity for an aggregate group key."""
    payload = json.dumps(list(key), sort_keys=True, separators=(",", ":"),
                         ensure_ascii=False, default=str)
    digest = hashlib.blake2b(payload.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _need(table: DataTable, fields) -> None:
    for f in fields:
        if f not in table.columns:
            raise MissingFieldError(f, table.name)


# --------------------------------------------------------------------------
# per-kind implementations
# --------------------------------------------------------------------------

def _t_filter(t, table):
    tree = parse_expr(t.params["expr"])
    out = DataTable(table.name, list(table.columns))
    for r in table.rows:
        try:
            keep = eval_expr(tree, r.cells)
        except UnknownFieldRefError as e:
            raise MissingFieldError(e.name, table.name) from None
        if keep is True:
            out.rows.append(r.copy())
    return out


def _t_formula(t, table):
    tree = parse_expr(t.params["expr"])
    as_name = t.params["as"]
    out = DataTable(table.name, list(table.columns))
    if as_name not in out.columns:
        out.columns.append(as_name)
    for r in table.rows:
        try:
            v = eval_expr(tree, r.cells)
        except UnknownFieldRefError as e:
            raise MissingFieldError(e.name, table.name) from None
        nr = r.copy()
        nr.cells[as_name] = v
        out.rows.append(nr)
    return out


def _t_sort(t, table):
    fld = t.params["field"]
    _need(table, [fld])
    reverse = t.params.get("order") == "descending"

    def key(r: Row):
        v = r.cells[fld]
        # nulls sort after every value regardless of direction
        if v is None:
            return (1, 0, "")
        if _is_num(v):
            return (0, 0, float(v))
        return (0, 1, str(v))

    out = DataTable(table.name, list(table.columns))
    head = [r.copy() for r in table.rows if r.cells[fld] is not None]
    tail = [r.copy() for r in table.rows if r.cells[fld] is None]
    head.sort(key=key, reverse=reverse)
    out.rows = head + tail
    return out


def _agg_value(op: str, values: list):
    nums = [float(v) for v in values if _is_num(v)]
    if op == "count":
        return len(values)
    if not nums:
        return None
    if op == "sum":
        return sum(nums)
    if op == "mean":
        return sum(nums) / len(nums)
    if op == "min":
        return min(nums)
    if op == "max":
        return max(nums)
    raise MissingFieldError(op)


def _t_aggregate(t, table):
    p = t.params
    groupby = list(p["groupby"])
    ops = list(p["ops"])
    fields = list(p["fields"])
    names = p.get("as") or [f"{op}_{f}" if op != "count" else "count"
                            for op, f in zip(ops, fields)]
    _need(table, groupby + [f for op, f in zip(ops, fields) if op != "count"])

    order: list[tuple] = []
    groups: dict[tuple, list[Row]] = {}
    for r in table.rows:
        key = tuple(r.cells[g] for g in groupby)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)

    out = DataTable(table.name, groupby + list(names))
    for key in order:
        members = groups[key]
        cells = dict(zip(groupby, key))
        for op, fld, name in zip(ops, fields, names):
            vals = ([m.cells.get(fld) for m in members] if op != "count"
                    else [None] * len(members))
            cells[name] = _agg_value(op, vals)
        tag = "base" if all(m.tag == "base" for m in members) else "augment"
        out.rows.append(Row(group_pid(key), tag, cells))
    return out


def _t_stack(t, table):
    p = t.params
    groupby = list(p["groupby"])
    fld = p["field"]
    sort_field = p.get("sortField")
    _need(table, groupby + [fld] + ([sort_field] if sort_field else []))

    out = DataTable(table.name, list(table.columns))
    for c in ("y0", "y1"):
        if c not in out.columns:
            out.columns.append(c)

    by_group: dict[tuple, list[int]] = {}
    for idx, r in enumerate(table.rows):
        key = tuple(r.cells[g] for g in groupby)
        by_group.setdefault(key, []).append(idx)

    y0s: dict[int, tuple] = {}
    for key, idxs in by_group.items():
        if sort_field is not None:
            idxs = sorted(idxs, key=lambda i: (
                table.rows[i].cells[sort_field] is None,
                float(table.rows[i].cells[sort_field])
                if _is_num(table.rows[i].cells[sort_field])
                else float("inf")))
        prefix = 0.0
        for i in idxs:
            v = table.rows[i].cells[fld]
            v = float(v) if _is_num(v) else 0.0
            y0s[i] = (prefix, prefix + v)
            prefix += v

    for idx, r in enumerate(table.rows):
        nr = r.copy()
        nr.cells["y0"], nr.cells["y1"] = y0s[idx]
        out.rows.append(nr)
    return out


def _t_pie(t, table):
    fld = t.params["field"]
    start = t.params.get("startAngle", 0)
    _need(table, [fld])
    values = [float(r.cells[fld]) if _is_num(r.cells[fld]) else 0.0
              for r in table.rows]
    total = sum(values)
    out = DataTable(table.name, list(table.columns))
    for c in ("startAngle", "endAngle"):
        if c not in out.columns:
            out.columns.append(c)
    prefix = 0.0
    for r, v in zip(table.rows, values):
        nr = r.copy()
        if total == 0:
            a0 = a1 = float(start)
        else:
            a0 = start + 2 * math.pi * prefix / total
            a1 = start + 2 * math.pi * (prefix + v) / total
        nr.cells["startAngle"] = a0
        nr.cells["endAngle"] = a1
        prefix += v
        out.rows.append(nr)
    return out


def nice_step(raw: float) -> float:
    """Smallest 1/2/5 * 10^k that is >= raw."""
    if raw <= 0:
        return 1.0
    k = math.floor(math.log10(raw))
    for mag in (10.0 ** k, 10.0 ** (k + 1)):
        for m in (1.0, 2.0, 5.0):
            step = m * mag
            if step >= raw or math.isclose(step, raw, rel_tol=1e-12):
                return step
    return 10.0 ** (k + 2)


def bin_step(lo: float, hi: float, maxbins: int) -> float:
    span = hi - lo
    if span <= 0:
        return 1.0
    step = nice_step(span / maxbins)
    while math.ceil(span / step - 1e-12) > maxbins:
        step = nice_step(step * 1.0000001)
    return step


def _t_bin(t, table):
    fld = t.params["field"]
    _need(table, [fld])
    extent = t.params.get("extent", "auto")
    maxbins = t.params.get("maxbins", 10)
    nums = [float(r.cells[fld]) for r in table.rows if _is_num(r.cells[fld])]
    if extent == "auto":
        if not nums:
            lo, hi = 0.0, 1.0
        else:
            lo, hi = min(nums), max(nums)
    else:
        lo, hi = float(extent[0]), float(extent[1])
    step = bin_step(lo, hi, maxbins)

    out = DataTable(table.name, list(table.columns))
    for c in ("bin0", "bin1"):
        if c not in out.columns:
            out.columns.append(c)
    for r in table.rows:
        nr = r.copy()
        v = r.cells[fld]
        if _is_num(v):
            b0 = math.floor(float(v) / step) * step
            nr.cells["bin0"] = b0
            nr.cells["bin1"] = b0 + step
        else:
            nr.cells["bin0"] = None
            nr.cells["bin1"] = None
        out.rows.append(nr)
    return out


def _build_tree(table: DataTable, id_field: str, parent_field: str):
    """Shared by the hierarchy kinds: returns (ids in row order, children map,
    roots, depth map). Children keep input row order."""
    _need(table, [id_field, parent_field])
    index: dict = {}
    for r in table.rows:
        nid = r.cells[id_field]
        if nid in index:
            raise DuplicateNodeIdError(nid)
        index[nid] = r
    children: dict = {nid: [] for nid in index}
    roots = []
    for r in table.rows:
        nid = r.cells[id_field]
        parent = r.cells[parent_field]
        if parent is None:
            roots.append(nid)
        else:
            if parent not in index:
                raise DanglingParentError(nid, parent)
            children[parent].append(nid)

    depth: dict = {}

    def walk(nid, d, trail):
        if nid in trail:
            raise CyclicHierarchyError(nid)
        depth[nid] = d
        for c in children[nid]:
            walk(c, d + 1, trail | {nid})

    for root in roots:
        walk(root, 0, frozenset())
    if len(depth) != len(index):
        # nodes unreachable from any root form a cycle
        missing = next(nid for nid in index if nid not in depth)
        raise CyclicHierarchyError(missing)
    return index, children, roots, depth


def _t_hierarchy(t, table):
    p = t.params
    _, children, _, depth = _build_tree(table, p["idField"], p["parentField"])
    out = DataTable(table.name, list(table.columns))
    for c in ("depth", "childCount"):
        if c not in out.columns:
            out.columns.append(c)
    for r in table.rows:
        nid = r.cells[p["idField"]]
        nr = r.copy()
        nr.cells["depth"] = depth[nid]
        nr.cells["childCount"] = len(children[nid])
        out.rows.append(nr)
    return out


def _t_treelayout(t, table):
    p = t.params
    method = p["method"]
    size = p.get("size", [400, 300])
    level_gap = p.get("levelGap", 40)
    leaf_step = p.get("leafStep", 24)
    _, children, roots, depth = _build_tree(table, p["idField"], p["parentField"])

    x: dict = {}
    leaf_counter = [0]

    def place(nid):
        if not children[nid]:
            x[nid] = leaf_counter[0] * leaf_step
            leaf_counter[0] += 1
        else:
            for c in children[nid]:
                place(c)
            xs = [x[c] for c in children[nid]]
            x[nid] = sum(xs) / len(xs)

    for root in roots:
        place(root)

    max_depth = max(depth.values()) if depth else 0
    out = DataTable(table.name, list(table.columns))
    for c in ("x", "y", "depth"):
        if c not in out.columns:
            out.columns.append(c)
    for r in table.rows:
        nid = r.cells[p["idField"]]
        nr = r.copy()
        nr.cells["x"] = x[nid]
        if method == "cluster":
            # data-dependent denominator: deeper appended nodes move everything
            nr.cells["y"] = (depth[nid] / max_depth * size[1]
                             if max_depth > 0 else 0.0)
        else:  # tidy
            nr.cells["y"] = depth[nid] * level_gap
        nr.cells["depth"] = depth[nid]
        out.rows.append(nr)
    return out


def _t_treemap(t, table):
    p = t.params
    size = p["size"]
    value_field = p["valueField"]
    _need(table, [value_field])
    index, children, roots, depth = _build_tree(table, p["idField"], p["parentField"])

    sums: dict = {}

    def subtree_sum(nid):
        if children[nid]:
            s = sum(subtree_sum(c) for c in children[nid])
        else:
            v = index[nid].cells[value_field]
            s = float(v) if _is_num(v) else 0.0
        sums[nid] = s
        return s

    boxes: dict = {}

    def divide(box, nodes, axis):
        x0, y0, x1, y1 = box
        total = sum(sums[n] for n in nodes)
        span = (x1 - x0) if axis == 0 else (y1 - y0)
        pos = x0 if axis == 0 else y0
        for n in nodes:
            share = (sums[n] / total * span if total > 0
                     else span / len(nodes))
            if axis == 0:
                boxes[n] = (pos, y0, pos + share, y1)
            else:
                boxes[n] = (x0, pos, x1, pos + share)
            pos += share
            if children[n]:
                # alternate axes by depth parity (even depth dices along x)
                divide(boxes[n], children[n], depth[n] % 2)

    for root in roots:
        subtree_sum(root)
    divide((0.0, 0.0, float(size[0]), float(size[1])), roots, 0)

    out = DataTable(table.name, list(table.columns))
    for c in ("x0", "y0", "x1", "y1"):
        if c not in out.columns:
            out.columns.append(c)
    for r in table.rows:
        nid = r.cells[p["idField"]]
        nr = r.copy()
        nr.cells["x0"], nr.cells["y0"], nr.cells["x1"], nr.cells["y1"] = boxes[nid]
        out.rows.append(nr)
    return out


_IMPL = {
    "filter": _t_filter,
    "formula": _t_formula,
    "sort": _t_sort,
    "aggregate": _t_aggregate,
    "stack": _t_stack,
    "pie": _t_pie,
    "bin": _t_bin,
    "hierarchy": _t_hierarchy,
    "treelayout": _t_treelayout,
    "treemap": _t_treemap,
}


def apply_transform(t: TransformDecl, table: DataTable) -> DataTable:
    return _IMPL[t.kind](t, table)


def run_pipeline(spec: Spec, tables: dict[str, DataTable]) -> dict[str, DataflowTrace]:
    """Execute every dataset's pipeline, snapshotting each intermediate state."""
    traces: dict[str, DataflowTrace] = {}
    for ds in spec.datasets:
        table = tables[ds.name]
        trace = DataflowTrace(ds.name, table.copy())
        current = table
        for i, t in enumerate(ds.transforms):
            try:
                current = apply_transform(t, current)
            except Exception as e:  # noqa: BLE001 - stage attribution
                raise PipelineError(ds.name, i, e) from e
            trace.stages.append(Stage(copy.deepcopy(t), current.copy()))
        traces[ds.name] = trace
    return traces


def tables_from_spec(spec: Spec) -> dict[str, DataTable]:
    """Ingest every dataset: declared values as base, augment_values appended."""
    tables = {}
    for ds in spec.datasets:
        table = ingest(ds, ds.values, "base")
        if ds.augment_values:
            table = append_rows(table, ds.augment_values)
        tables[ds.name] = table
    return tables
