"""Augmentation validity: dataflow-state diffing with per-transform hints,
scale-mapping checks, occlusion and scalability warnings, plus the
independent scene-graph oracle the test suite pits the validator against.

The extend-mode rule: restrict every intermediate state of the augmented run
to the rows the static layer was built from; the static layer is unchanged
iff every restricted state equals the base run's state, order included.
"""

from dataclasses import dataclass, field as dc_field

from .augment import AugmentationClass
from .compiler import CompileResult, compile_spec
from .dataflow import DataflowTrace, DataTable
from .errors import NoArBlockError, PipelineShapeMismatchError, ScaleError
from .scales import ResolvedScale
from .scene import MarkItem, SceneGraph
from .specmodel import Rect, Spec

REL_TOL = 1e-9
ABS_TOL = 1e-12

#: Designer-facing fix message per transform kind. The treemap text is a
#: stable public string; tools match on it byte for byte.
HINTS = {
    "filter": "a 'filter' decision on existing rows changed; appended data "
              "must not alter the fields the predicate reads",
    "formula": "a 'formula' output on existing rows changed; keep the "
               "expression a function of the row itself",
    "sort": "'sort' rearranged existing rows; append data that keeps the "
            "original order stable",
    "aggregate": "an existing 'aggregate' group absorbed appended rows; "
                 "append rows that form new groups instead",
    "stack": "'stack' offsets of existing rows changed; appended rows must "
             "stack after the existing ones",
    "pie": "'pie' re-normalizes every slice when data is appended; the "
           "printed arcs cannot change, so extend a different encoding",
    "bin": "'bin' boundaries follow the data extent; pin extent to a fixed "
           "range so appended values cannot move existing bins",
    "hierarchy": "'hierarchy' recomputed depth or child counts of existing "
                 "nodes; attach appended data beneath new nodes only",
    "treelayout": "switch the layout method from 'cluster' to 'tidy': tidy "
                  "appends new nodes without moving the existing ones",
    "treemap": "avoid 'treemap' when new nodes are added to the internal nodes",
    "input": "appended rows changed the raw input restriction; this should "
             "not happen and indicates an ingestion problem",
}

_SCALE_HINTS = {
    "linear": "the linear mapping of existing values changed (slope or "
              "intercept moved); fix the domain instead of deriving it from "
              "appended data",
    "band": "existing categories moved: the appended domain must keep the "
            "original values as a prefix with the same step and paddings",
    "point": "existing categories moved: the appended domain must keep the "
             "original values as a prefix with the same step and paddings",
    "ordinal": "existing categories were re-colored; appended values must "
               "not reorder the color assignment",
}


@dataclass
class Mismatch:
    key: object          # provenance id or group key
    field: str
    base_value: object
    aug_value: object

    def to_dict(self):
        return {"key": self.key if not isinstance(self.key, tuple)
                else list(self.key),
                "field": self.field,
                "baseValue": self.base_value,
                "augValue": self.aug_value}


@dataclass
class StageDiff:
    dataset: str
    stage_index: int
    transform_kind: str
    mismatches: list[Mismatch]
    hint: str

    def to_dict(self):
        return {"dataset": self.dataset,
                "stageIndex": self.stage_index,
                "transformKind": self.transform_kind,
                "mismatches": [m.to_dict() for m in self.mismatches],
                "hint": {"id": self.transform_kind,
                         "text": self.hint}}


@dataclass
class ScaleDiff:
    scale: str
    kind: str
    reason: str
    hint: str

    def to_dict(self):
        return {"scale": self.scale, "kind": self.kind,
                "reason": self.reason,
                "hint": {"id": f"scale-{self.kind}", "text": self.hint}}


@dataclass
class Occlusion:
    virtual_item: dict
    target_kind: str   # "protected" | "static-item"
    target: dict
    overlap_area: float

    def to_dict(self):
        return {"virtualItem": self.virtual_item,
                "target": {"kind": self.target_kind, **self.target},
                "overlapArea": self.overlap_area}


@dataclass
class ValidationReport:
    verdict: str
    mode: AugmentationClass
    stage_diffs: list[StageDiff] = dc_field(default_factory=list)
    scale_diffs: list[ScaleDiff] = dc_field(default_factory=list)
    occlusions: list[Occlusion] = dc_field(default_factory=list)
    warnings: list[str] = dc_field(default_factory=list)

    def to_dict(self):
        return {"verdict": self.verdict,
                "mode": self.mode.to_dict(),
                "stageDiffs": [d.to_dict() for d in self.stage_diffs],
                "scaleDiffs": [d.to_dict() for d in self.scale_diffs],
                "occlusions": [o.to_dict() for o in self.occlusions],
                "warnings": list(self.warnings)}


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def numeq(a: float, b: float) -> bool:
    return abs(a - b) <= max(ABS_TOL, REL_TOL * max(abs(a), abs(b)))


def values_equal(a, b) -> bool:
    if _is_num(a) and _is_num(b):
        return numeq(float(a), float(b))
    return type(a) is type(b) and a == b


# --------------------------------------------------------------------------
# dataflow diffing
# --------------------------------------------------------------------------

def _group_key(table: DataTable, row, groupby):
    return tuple(row.cells[g] for g in groupby)


def _diff_row_stage(base: DataTable, aug: DataTable, *, adjacency: bool
                    ) -> list[Mismatch]:
    """Row-level / layout comparison: every base-run row must reappear with
    identical fields and unchanged relative order.

    With `adjacency` (datasets drawn as connected lines), each surviving base
    row must also keep its immediate predecessor, because its rendered
    segment starts at the previous row's point."""
    mismatches: list[Mismatch] = []
    base_pids = set(base.pids())
    aug_by_pid = {r.pid: r for r in aug.rows if r.pid in base_pids}

    for r in base.rows:
        other = aug_by_pid.get(r.pid)
        if other is None:
            mismatches.append(Mismatch(r.pid, "(row)", "present", "missing"))
            continue
        for col in base.columns:
            a, b = r.cells.get(col), other.cells.get(col)
            if not values_equal(a, b):
                mismatches.append(Mismatch(r.pid, col, a, b))

    base_seq = base.pids()
    aug_seq = [r.pid for r in aug.rows if r.pid in base_pids]
    if base_seq != aug_seq:
        for pos, (bp, ap) in enumerate(zip(base_seq, aug_seq)):
            if bp != ap:
                mismatches.append(Mismatch(bp, "(order)", pos,
                                           aug_seq.index(bp) if bp in aug_seq else -1))
                break

    if adjacency and not mismatches:
        prev_base: dict[int, int | None] = {}
        prev = None
        for r in base.rows:
            prev_base[r.pid] = prev
            prev = r.pid
        prev = None
        for r in aug.rows:
            if r.pid in base_pids and prev_base.get(r.pid, None) != prev:
                mismatches.append(Mismatch(r.pid, "(adjacency)",
                                           prev_base.get(r.pid), prev))
                break
            prev = r.pid
    return mismatches


def _diff_aggregate_stage(base: DataTable, aug: DataTable, groupby
                          ) -> list[Mismatch]:
    mismatches: list[Mismatch] = []
    aug_by_key = {_group_key(aug, r, groupby): r for r in aug.rows}
    for r in base.rows:
        key = _group_key(base, r, groupby)
        other = aug_by_key.get(key)
        if other is None:
            mismatches.append(Mismatch(key, "(group)", "present", "missing"))
            continue
        for col in base.columns:
            a, b = r.cells.get(col), other.cells.get(col)
            if not values_equal(a, b):
                mismatches.append(Mismatch(key, col, a, b))
    return mismatches


def diff_traces(base: DataflowTrace, aug: DataflowTrace,
                adjacency: bool = False) -> list[StageDiff]:
    """Compare every pipeline stage, base-run rows only. Returns one
    StageDiff per differing stage (first entry carries the hinted transform);
    later stages are still scanned for reporting completeness."""
    if [s.transform.kind for s in base.stages] != \
            [s.transform.kind for s in aug.stages]:
        raise PipelineShapeMismatchError(
            f"dataset '{base.dataset}': pipelines differ")

    diffs: list[StageDiff] = []
    pairs = [((None, base.input), (None, aug.input))] + [
        ((bs.transform, bs.output), (as_.transform, as_.output))
        for bs, as_ in zip(base.stages, aug.stages)]

    for stage_index in range(1, len(pairs)):
        (transform, bout), (_, aout) = pairs[stage_index]
        kind = transform.kind
        is_final = stage_index == len(pairs) - 1
        if kind == "aggregate":
            mismatches = _diff_aggregate_stage(bout, aout,
                                               transform.params["groupby"])
        else:
            mismatches = _diff_row_stage(bout, aout,
                                         adjacency=adjacency and is_final)
        if mismatches:
            diffs.append(StageDiff(base.dataset, stage_index - 1, kind,
                                   mismatches, HINTS[kind]))

    if adjacency and not base.stages:
        mismatches = _diff_row_stage(base.input, aug.input, adjacency=True)
        if mismatches:
            diffs.append(StageDiff(base.dataset, -1, "input", mismatches,
                                   HINTS["input"]))
    return diffs


# --------------------------------------------------------------------------
# scale diffing
# --------------------------------------------------------------------------

def _domain_keys(scale: ResolvedScale):
    from .scales import _domain_key
    return [_domain_key(v) for v in scale.domain]


def check_scales(base_scales: dict[str, ResolvedScale],
                 aug_scales: dict[str, ResolvedScale]) -> list[ScaleDiff]:
    """The mapping each base-domain value receives must be unchanged."""
    diffs = []
    for name, base in base_scales.items():
        aug = aug_scales.get(name)
        if aug is None:
            continue
        if base.kind == "linear":
            if not (numeq(base.slope, aug.slope)
                    and numeq(base.intercept, aug.intercept)):
                diffs.append(ScaleDiff(name, "linear",
                                       "slope or intercept changed",
                                       _SCALE_HINTS["linear"]))
        elif base.kind in ("band", "point"):
            bk, ak = _domain_keys(base), _domain_keys(aug)
            if ak[:len(bk)] != bk:
                diffs.append(ScaleDiff(name, base.kind,
                                       "base domain is not a prefix of the "
                                       "augmented domain",
                                       _SCALE_HINTS[base.kind]))
            elif not (numeq(base.step, aug.step)
                      and numeq(base.padding_inner, aug.padding_inner)
                      and numeq(base.padding_outer, aug.padding_outer)
                      and numeq(base.r0, aug.r0)):
                diffs.append(ScaleDiff(name, base.kind,
                                       "step or paddings changed",
                                       _SCALE_HINTS[base.kind]))
        else:  # ordinal
            for v in base.domain:
                try:
                    if base.apply(v) != aug.apply(v):
                        diffs.append(ScaleDiff(name, "ordinal",
                                               f"value {v!r} changed color",
                                               _SCALE_HINTS["ordinal"]))
                        break
                except ScaleError:
                    diffs.append(ScaleDiff(name, "ordinal",
                                           f"value {v!r} left the domain",
                                           _SCALE_HINTS["ordinal"]))
                    break
    return diffs


# --------------------------------------------------------------------------
# occlusion
# --------------------------------------------------------------------------

def _overlap(a, b) -> float:
    w = min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0])
    h = min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1])
    return w * h if w > 0 and h > 0 else 0.0


def _item_ref(it: MarkItem) -> dict:
    return {"dataset": it.dataset, "pid": it.pid, "mark": it.mark_index,
            "kind": it.kind}


def detect_occlusion(virtual_items: list[MarkItem],
                     static_items: list[MarkItem],
                     protected: list[Rect]) -> list[Occlusion]:
    """Bounding-box checks on composed coordinates: any positive overlap with
    a protected region; mark-on-mark overlap above 5% of the static item."""
    out: list[Occlusion] = []
    for vi in virtual_items:
        vb = vi.bbox()
        for i, region in enumerate(protected):
            area = _overlap(vb, (region.x, region.y, region.w, region.h))
            if area > 0:
                out.append(Occlusion(
                    _item_ref(vi), "protected",
                    {"index": i, "label": region.label}, area))
        for si in static_items:
            sb = si.bbox()
            s_area = sb[2] * sb[3]
            area = _overlap(vb, sb)
            if s_area > 0 and area > 0.05 * s_area:
                out.append(Occlusion(_item_ref(vi), "static-item",
                                     _item_ref(si), area))
    return out


# --------------------------------------------------------------------------
# scene oracle
# --------------------------------------------------------------------------

@dataclass
class OracleReport:
    valid: bool
    mismatched: list[tuple]
    missing: list[tuple]
    max_displacement: float

    def to_dict(self):
        return {"valid": self.valid,
                "mismatched": [list(k) for k in self.mismatched],
                "missing": [list(k) for k in self.missing],
                "maxDisplacement": self.max_displacement}


def scene_oracle(base_scene: SceneGraph, aug_scene: SceneGraph) -> OracleReport:
    """Independent validity check: every base item must reappear in the
    augmented scene with identical kind, geometry (1e-9 relative), and style.
    A printed layer cannot move or recolor, so any change is a failure; the
    displacement magnitude is reported so callers can tell unnoticeable
    mismatches from gross ones."""
    aug_by_key = {}
    for it in aug_scene.items:
        aug_by_key[it.key()] = it

    mismatched: list[tuple] = []
    missing: list[tuple] = []
    max_disp = 0.0
    for it in base_scene.items:
        other = aug_by_key.get(it.key())
        if other is None:
            missing.append(it.key())
            continue
        bad = it.kind != other.kind or it.style != other.style
        for gk, gv in it.geometry.items():
            ov = other.geometry.get(gk)
            if isinstance(gv, str) or isinstance(ov, str):
                if gv != ov:
                    bad = True
                continue
            if ov is None or not numeq(float(gv), float(ov)):
                bad = True
            if ov is not None:
                max_disp = max(max_disp, abs(float(gv) - float(ov)))
        if bad:
            mismatched.append(it.key())
    return OracleReport(not mismatched and not missing,
                        mismatched, missing, max_disp)


# --------------------------------------------------------------------------
# top-level validation
# --------------------------------------------------------------------------

def _line_datasets(spec: Spec) -> set[str]:
    return {m.source for m in spec.marks if m.kind == "line"}


def _verdict(report: ValidationReport) -> str:
    if report.stage_diffs or report.scale_diffs:
        return "invalid"
    if report.occlusions or report.warnings:
        return "warnings"
    return "valid"


def _scalability_warnings(result: CompileResult) -> list[str]:
    """Small multiples: flag replacement values that fall outside the base
    scale domains, the sign that the shared encoding may not fit."""
    warnings = []
    base_scales = result.base.scales
    from .specmodel import DataRef
    for mi, bundle in enumerate(result.multiples):
        for decl in bundle.spec.scales:
            if not isinstance(decl.domain, DataRef):
                continue
            base = base_scales.get(decl.name)
            sub = bundle.scales.get(decl.name)
            if base is None or sub is None:
                continue
            if base.kind == "linear":
                lo, hi = base.domain
                if sub.domain[0] < lo - ABS_TOL or sub.domain[1] > hi + ABS_TOL:
                    warnings.append(
                        f"multiple {mi}: values of '{decl.domain.field}' fall "
                        f"outside the base domain of scale '{decl.name}'")
            else:
                base_keys = set(_domain_keys(base))
                extra = [v for v, k in zip(sub.domain, _domain_keys(sub))
                         if k not in base_keys]
                if extra:
                    warnings.append(
                        f"multiple {mi}: scale '{decl.name}' meets unseen "
                        f"values {extra[:3]!r}")
    return warnings


def validate(spec: Spec, seed: int | None = None,
             compiled: CompileResult | None = None) -> ValidationReport:
    """Decide validity per augmentation mode. extend: dataflow diffing plus
    scale checks plus occlusion; composite: occlusion only; smallMultiple:
    scalability warnings; multipleView: placement-bounds note only."""
    if spec.ar is None:
        raise NoArBlockError()
    result = compiled if compiled is not None else compile_spec(spec, seed)
    mode = result.mode
    report = ValidationReport("valid", mode)

    if mode.mode == "extend":
        line_sets = _line_datasets(result.spec)
        for name, base_trace in result.base.traces.items():
            aug_trace = result.aug.traces.get(name)
            if aug_trace is None:
                continue
            report.stage_diffs.extend(
                diff_traces(base_trace, aug_trace, adjacency=name in line_sets))
        report.scale_diffs = check_scales(result.base.scales, result.aug.scales)
        report.occlusions = detect_occlusion(
            result.composed.virtual_items_absolute(),
            result.base.scene.items, result.spec.protected)
    elif mode.mode == "composite":
        report.occlusions = detect_occlusion(
            result.composed.virtual_items_absolute(),
            result.base.scene.items, result.spec.protected)
    elif mode.mode == "smallMultiple":
        report.warnings = _scalability_warnings(result)
    else:  # multipleView: always valid; note out-of-bounds placement only
        rect = result.composed.virtual_rect
        if rect is not None:
            overlap = _overlap(rect, (0.0, 0.0, result.base.scene.width,
                                      result.base.scene.height))
            if overlap > 0:
                report.warnings.append(
                    "virtual view overlaps the static canvas "
                    f"(area {overlap:.1f} px^2); widen the placement gap")

    report.verdict = _verdict(report)
    return report
