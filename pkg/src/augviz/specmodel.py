"""Parse, schema-check, and canonicalize the declarative chart document.

The external format is UTF-8 JSON (conventionally `.pv.json`). Top-level keys:
``width``, ``height``, ``data``, ``scales``, ``marks``, ``protected``, ``ar``.
Unknown keys are rejected at every level so a canonicalized document is a
faithful, lossless rewrite of the input.

Number policy: any JSON number that is integral and below 2**53 in magnitude
is represented as a Python int; everything else stays a float. Canonical
output serializes ints bare and floats via their shortest round-trip repr,
which keeps parse -> canonicalize -> parse a fixed point.
"""

import json
from dataclasses import dataclass, field
from typing import Any

from .errors import (
    ModeConflictError,
    SpecSyntaxError,
    TypeMismatchError,
    UnknownFieldError,
)

MODES = ("extend", "composite", "smallMultiple", "multipleView")
DIRECTIONS = ("right", "left", "top", "bottom", "overlay")
TRANSFORM_KINDS = ("filter", "formula", "aggregate", "sort", "stack", "pie",
                   "bin", "hierarchy", "treelayout", "treemap")
SCALE_KINDS = ("linear", "band", "point", "ordinal")
MARK_KINDS = ("rect", "symbol", "line", "arc", "path", "text")
AGG_OPS = ("sum", "count", "mean", "min", "max")
FIELD_KINDS = ("categorical", "quantitative", "temporal")

#: Fixed fill palette for ordinal scales; index = first-appearance order.
PALETTE = (
    "#4C78A8", "#F58518", "#54A24B", "#E45756", "#72B7B2",
    "#EECA3B", "#B279A2", "#FF9DA6", "#9D755D", "#BAB0AC",
)

MAX_SAFE_INT = 2 ** 53


# --------------------------------------------------------------------------
# model types
# --------------------------------------------------------------------------

@dataclass
class TransformDecl:
    kind: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class DatasetDecl:
    name: str
    columns: list[str]
    values: list[dict[str, Any]]
    transforms: list[TransformDecl] = field(default_factory=list)
    # Filled only for extend-mode compiles; never part of the external format.
    augment_values: list[dict[str, Any]] = field(default_factory=list)


@dataclass
class DataRef:
    data: str
    field: str


@dataclass
class ScaleDecl:
    name: str
    kind: str
    domain: Any  # list of values / [lo, hi] / DataRef
    range: Any   # [lo, hi] | list of colors | "palette"
    padding_inner: float | None = None
    padding_outer: float | None = None


class _Absent:
    """Marker for 'no value channel'; survives copy/deepcopy as a singleton
    so identity checks stay valid on cloned specs."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __repr__(self):
        return "<absent>"


_ABSENT = _Absent()


@dataclass
class ChannelDef:
    scale: str | None = None
    field: str | None = None
    value: Any = _ABSENT
    band: float | None = None

    @property
    def has_value(self) -> bool:
        return self.value is not _ABSENT


@dataclass
class MarkDecl:
    kind: str
    source: str
    encode: dict[str, ChannelDef]


@dataclass
class Rect:
    x: float
    y: float
    w: float
    h: float
    label: str | None = None


@dataclass
class Placement:
    direction: str = "overlay"
    dx: float = 0
    dy: float = 0
    gap: float = 0
    width_hint: float | None = None
    height_hint: float | None = None


@dataclass
class AnchorConfig:
    box: list[float]  # [x, y, w, h]


@dataclass
class PlaceholderField:
    name: str
    kind: str
    pattern: str | None = None
    range: list[float] | None = None
    span: list[Any] | None = None  # [startISO, endISO, stepSeconds]
    options: list[str] | None = None


@dataclass
class PlaceholderSpec:
    count: int
    fields: list[PlaceholderField]
    seed: int = 1


@dataclass
class AppendDecl:
    dataset: str
    values: list[dict[str, Any]] | None = None
    placeholder: PlaceholderSpec | None = None


@dataclass
class ArBlock:
    mode: str
    appends: list[AppendDecl] = field(default_factory=list)
    nested: "Spec | None" = None
    placement: Placement | None = None
    anchor: AnchorConfig | None = None


@dataclass
class Spec:
    width: int
    height: int
    datasets: list[DatasetDecl] = field(default_factory=list)
    scales: list[ScaleDecl] = field(default_factory=list)
    marks: list[MarkDecl] = field(default_factory=list)
    protected: list[Rect] = field(default_factory=list)
    ar: ArBlock | None = None

    def dataset(self, name: str) -> DatasetDecl | None:
        for d in self.datasets:
            if d.name == name:
                return d
        return None


@dataclass
class SchemaIssue:
    code: str
    path: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"code": self.code, "path": self.path, "message": self.message}


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

def _norm_num(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, float) and v.is_integer() and abs(v) < MAX_SAFE_INT:
        return int(v)
    return v


def _expect(obj, path, kind):
    ok = {
        "object": lambda o: isinstance(o, dict),
        "array": lambda o: isinstance(o, list),
        "string": lambda o: isinstance(o, str),
        "number": lambda o: isinstance(o, (int, float)) and not isinstance(o, bool),
        "integer": lambda o: isinstance(o, int) and not isinstance(o, bool),
        "boolean": lambda o: isinstance(o, bool),
    }[kind]
    if not ok(obj):
        raise TypeMismatchError(path, kind)
    return obj


def _check_keys(obj, path, allowed):
    for k in obj:
        if k not in allowed:
            raise UnknownFieldError(f"{path}.{k}" if path else k)


def _get(obj, key, path, kind, default=_ABSENT):
    if key not in obj:
        if default is _ABSENT:
            raise TypeMismatchError(f"{path}.{key}" if path else key,
                                    f"required {kind}")
        return default
    return _expect(obj[key], f"{path}.{key}" if path else key, kind)


def _is_scalar(v) -> bool:
    return v is None or isinstance(v, (bool, int, float, str))


def _parse_rows(raw, path) -> list[dict[str, Any]]:
    rows = []
    for i, r in enumerate(_expect(raw, path, "array")):
        _expect(r, f"{path}[{i}]", "object")
        row = {}
        for k, v in r.items():
            if not _is_scalar(v):
                raise TypeMismatchError(f"{path}[{i}].{k}", "scalar value")
            row[k] = _norm_num(v)
        rows.append(row)
    return rows


_TRANSFORM_PARAMS: dict[str, dict[str, str]] = {
    # param name -> type tag; "?" prefix marks optional
    "filter": {"expr": "string"},
    "formula": {"expr": "string", "as": "string"},
    "aggregate": {"groupby": "strings", "ops": "strings", "fields": "strings",
                  "?as": "strings"},
    "sort": {"field": "string", "?order": "string"},
    "stack": {"groupby": "strings", "field": "string", "?sortField": "string"},
    "pie": {"field": "string", "?startAngle": "number"},
    "bin": {"field": "string", "?extent": "extent", "?maxbins": "integer"},
    "hierarchy": {"idField": "string", "parentField": "string"},
    "treelayout": {"method": "string", "idField": "string",
                   "parentField": "string", "?size": "numbers",
                   "?levelGap": "number", "?leafStep": "number"},
    "treemap": {"valueField": "string", "idField": "string",
                "parentField": "string", "size": "numbers",
                "?method": "string"},
}


def _parse_param(v, path, tag):
    if tag in ("string", "number", "integer", "boolean"):
        v = _expect(v, path, tag)
        return _norm_num(v) if tag in ("number", "integer") else v
    if tag == "strings":
        _expect(v, path, "array")
        return [_expect(s, f"{path}[{i}]", "string") for i, s in enumerate(v)]
    if tag == "numbers":
        _expect(v, path, "array")
        return [_norm_num(_expect(n, f"{path}[{i}]", "number"))
                for i, n in enumerate(v)]
    if tag == "extent":  # "auto" or [lo, hi]
        if v == "auto":
            return v
        _expect(v, path, "array")
        if len(v) != 2:
            raise TypeMismatchError(path, '"auto" or [lo, hi]')
        return [_norm_num(_expect(n, f"{path}[{i}]", "number"))
                for i, n in enumerate(v)]
    raise AssertionError(tag)


def _parse_transform(raw, path) -> TransformDecl:
    _expect(raw, path, "object")
    kind = _get(raw, "kind", path, "string")
    if kind not in TRANSFORM_KINDS:
        raise TypeMismatchError(f"{path}.kind",
                                "one of " + "|".join(TRANSFORM_KINDS))
    schema = _TRANSFORM_PARAMS[kind]
    allowed = {"kind"} | {k.lstrip("?") for k in schema}
    _check_keys(raw, path, allowed)
    params = {}
    for key, tag in schema.items():
        optional = key.startswith("?")
        name = key.lstrip("?")
        if name in raw:
            params[name] = _parse_param(raw[name], f"{path}.{name}", tag)
        elif not optional:
            raise TypeMismatchError(f"{path}.{name}", f"required {tag}")
    return TransformDecl(kind, params)


def _parse_dataset(raw, path) -> DatasetDecl:
    _expect(raw, path, "object")
    _check_keys(raw, path, {"name", "values", "fields", "transform"})
    name = _get(raw, "name", path, "string")
    values = _parse_rows(raw.get("values", []), f"{path}.values")
    if "fields" in raw:
        columns = [_expect(c, f"{path}.fields[{i}]", "string")
                   for i, c in enumerate(_expect(raw["fields"], f"{path}.fields", "array"))]
    elif values:
        # derived order must not depend on row key order, so sort it
        columns = sorted(values[0].keys())
    else:
        columns = []
    transforms = []
    if "transform" in raw:
        for i, t in enumerate(_expect(raw["transform"], f"{path}.transform", "array")):
            transforms.append(_parse_transform(t, f"{path}.transform[{i}]"))
    return DatasetDecl(name, columns, values, transforms)


def _parse_scale(raw, path) -> ScaleDecl:
    _expect(raw, path, "object")
    _check_keys(raw, path, {"name", "kind", "domain", "range",
                            "paddingInner", "paddingOuter"})
    name = _get(raw, "name", path, "string")
    kind = _get(raw, "kind", path, "string")
    if kind not in SCALE_KINDS:
        raise TypeMismatchError(f"{path}.kind", "one of " + "|".join(SCALE_KINDS))

    if "domain" not in raw:
        raise TypeMismatchError(f"{path}.domain", "required domain")
    rd = raw["domain"]
    if isinstance(rd, dict):
        _check_keys(rd, f"{path}.domain", {"data", "field"})
        domain: Any = DataRef(_get(rd, "data", f"{path}.domain", "string"),
                              _get(rd, "field", f"{path}.domain", "string"))
    elif isinstance(rd, list):
        domain = [_norm_num(v) if isinstance(v, (int, float)) else v for v in rd]
        for i, v in enumerate(domain):
            if not _is_scalar(v):
                raise TypeMismatchError(f"{path}.domain[{i}]", "scalar value")
    else:
        raise TypeMismatchError(f"{path}.domain", "array or {data, field}")

    if "range" not in raw:
        raise TypeMismatchError(f"{path}.range", "required range")
    rr = raw["range"]
    if rr == "palette":
        rng: Any = "palette"
    elif isinstance(rr, list):
        rng = [_norm_num(v) if isinstance(v, (int, float)) else v for v in rr]
        for i, v in enumerate(rng):
            if not _is_scalar(v):
                raise TypeMismatchError(f"{path}.range[{i}]", "scalar value")
    else:
        raise TypeMismatchError(f"{path}.range", 'array or "palette"')

    pi = po = None
    if "paddingInner" in raw:
        pi = _norm_num(_expect(raw["paddingInner"], f"{path}.paddingInner", "number"))
    if "paddingOuter" in raw:
        po = _norm_num(_expect(raw["paddingOuter"], f"{path}.paddingOuter", "number"))
    if kind == "band":
        pi = 0.1 if pi is None else pi
        po = 0.05 if po is None else po
    elif kind == "point":
        pi = None
        po = 0.0 if po is None else po
    else:
        pi = po = None
    return ScaleDecl(name, kind, domain, rng, pi, po)


def _parse_channel(raw, path) -> ChannelDef:
    _expect(raw, path, "object")
    _check_keys(raw, path, {"scale", "field", "value", "band"})
    ch = ChannelDef()
    if "scale" in raw:
        ch.scale = _expect(raw["scale"], f"{path}.scale", "string")
    if "field" in raw:
        ch.field = _expect(raw["field"], f"{path}.field", "string")
    if "value" in raw:
        v = raw["value"]
        if not _is_scalar(v):
            raise TypeMismatchError(f"{path}.value", "scalar value")
        ch.value = _norm_num(v)
    if "band" in raw:
        b = raw["band"]
        if b is True:
            b = 1
        ch.band = _norm_num(_expect(b, f"{path}.band", "number"))
    given = sum(1 for x in (ch.field, ch.band) if x is not None) + ch.has_value
    if given != 1:
        raise TypeMismatchError(path, "exactly one of field | value | band")
    return ch


def _parse_mark(raw, path) -> MarkDecl:
    _expect(raw, path, "object")
    _check_keys(raw, path, {"kind", "from", "encode"})
    kind = _get(raw, "kind", path, "string")
    if kind not in MARK_KINDS:
        raise TypeMismatchError(f"{path}.kind", "one of " + "|".join(MARK_KINDS))
    source = _get(raw, "from", path, "string")
    encode = {}
    raw_enc = _get(raw, "encode", path, "object", default={})
    for ch_name, ch in raw_enc.items():
        encode[ch_name] = _parse_channel(ch, f"{path}.encode.{ch_name}")
    return MarkDecl(kind, source, encode)


def _parse_rect(raw, path) -> Rect:
    _expect(raw, path, "object")
    _check_keys(raw, path, {"x", "y", "w", "h", "label"})
    r = Rect(
        _norm_num(_get(raw, "x", path, "number")),
        _norm_num(_get(raw, "y", path, "number")),
        _norm_num(_get(raw, "w", path, "number")),
        _norm_num(_get(raw, "h", path, "number")),
    )
    if "label" in raw:
        r.label = _expect(raw["label"], f"{path}.label", "string")
    return r


def _parse_placement(raw, path) -> Placement:
    _expect(raw, path, "object")
    _check_keys(raw, path, {"direction", "dx", "dy", "gap",
                            "widthHint", "heightHint"})
    p = Placement()
    if "direction" in raw:
        d = _expect(raw["direction"], f"{path}.direction", "string")
        if d not in DIRECTIONS:
            raise TypeMismatchError(f"{path}.direction",
                                    "one of " + "|".join(DIRECTIONS))
        p.direction = d
    for key, attr in (("dx", "dx"), ("dy", "dy"), ("gap", "gap")):
        if key in raw:
            setattr(p, attr, _norm_num(_expect(raw[key], f"{path}.{key}", "number")))
    if "widthHint" in raw:
        p.width_hint = _norm_num(_expect(raw["widthHint"], f"{path}.widthHint", "number"))
    if "heightHint" in raw:
        p.height_hint = _norm_num(_expect(raw["heightHint"], f"{path}.heightHint", "number"))
    return p


def _parse_placeholder(raw, path) -> PlaceholderSpec:
    _expect(raw, path, "object")
    _check_keys(raw, path, {"count", "fields", "seed"})
    count = _get(raw, "count", path, "integer")
    fields = []
    for i, f in enumerate(_get(raw, "fields", path, "array")):
        fp = f"{path}.fields[{i}]"
        _expect(f, fp, "object")
        _check_keys(f, fp, {"name", "kind", "pattern", "range", "span", "options"})
        kind = _get(f, "kind", fp, "string")
        if kind not in FIELD_KINDS:
            raise TypeMismatchError(f"{fp}.kind", "one of " + "|".join(FIELD_KINDS))
        pf = PlaceholderField(_get(f, "name", fp, "string"), kind)
        if "pattern" in f:
            pf.pattern = _expect(f["pattern"], f"{fp}.pattern", "string")
        if "range" in f:
            arr = _expect(f["range"], f"{fp}.range", "array")
            if len(arr) != 2:
                raise TypeMismatchError(f"{fp}.range", "[lo, hi]")
            pf.range = [_norm_num(_expect(v, f"{fp}.range[{j}]", "number"))
                        for j, v in enumerate(arr)]
        if "span" in f:
            arr = _expect(f["span"], f"{fp}.span", "array")
            if len(arr) != 3:
                raise TypeMismatchError(f"{fp}.span", "[startISO, endISO, stepSeconds]")
            pf.span = [_expect(arr[0], f"{fp}.span[0]", "string"),
                       _expect(arr[1], f"{fp}.span[1]", "string"),
                       _norm_num(_expect(arr[2], f"{fp}.span[2]", "number"))]
        if "options" in f:
            pf.options = [_expect(o, f"{fp}.options[{j}]", "string")
                          for j, o in enumerate(_expect(f["options"], f"{fp}.options", "array"))]
        fields.append(pf)
    seed = 1
    if "seed" in raw:
        seed = _get(raw, "seed", path, "integer")
    return PlaceholderSpec(count, fields, seed)


def _parse_ar(raw, path) -> ArBlock:
    _expect(raw, path, "object")
    _check_keys(raw, path, {"mode", "appends", "nested", "placement", "anchor"})
    mode = _get(raw, "mode", path, "string")
    if mode not in MODES:
        raise TypeMismatchError(f"{path}.mode", "one of " + "|".join(MODES))
    if mode == "extend" and "nested" in raw:
        raise ModeConflictError(f"{path}.nested",
                                "mode 'extend' does not take a nested spec")
    if mode == "smallMultiple" and "nested" in raw:
        raise ModeConflictError(f"{path}.nested",
                                "mode 'smallMultiple' does not take a nested spec")
    if mode in ("composite", "multipleView") and "nested" not in raw:
        raise ModeConflictError(f"{path}.nested",
                                f"mode '{mode}' requires a nested spec")

    appends = []
    for i, a in enumerate(raw.get("appends", [])):
        ap = f"{path}.appends[{i}]"
        _expect(a, ap, "object")
        _check_keys(a, ap, {"dataset", "values", "placeholder"})
        decl = AppendDecl(_get(a, "dataset", ap, "string"))
        if "values" in a:
            decl.values = _parse_rows(a["values"], f"{ap}.values")
        if "placeholder" in a:
            decl.placeholder = _parse_placeholder(a["placeholder"], f"{ap}.placeholder")
        if (decl.values is None) == (decl.placeholder is None):
            raise TypeMismatchError(ap, "exactly one of values | placeholder")
        appends.append(decl)

    nested = None
    if "nested" in raw:
        nested = _parse_spec_obj(raw["nested"], f"{path}.nested")

    placement = None
    if "placement" in raw:
        placement = _parse_placement(raw["placement"], f"{path}.placement")

    anchor = None
    if "anchor" in raw:
        ap = f"{path}.anchor"
        _expect(raw["anchor"], ap, "object")
        _check_keys(raw["anchor"], ap, {"box"})
        box = _expect(_get(raw["anchor"], "box", ap, "array"), f"{ap}.box", "array")
        if len(box) != 4:
            raise TypeMismatchError(f"{ap}.box", "[x, y, w, h]")
        anchor = AnchorConfig([_norm_num(_expect(v, f"{ap}.box[{i}]", "number"))
                               for i, v in enumerate(box)])
    return ArBlock(mode, appends, nested, placement, anchor)


def _parse_spec_obj(raw, path) -> Spec:
    _expect(raw, path, "object")
    _check_keys(raw, path, {"width", "height", "data", "scales", "marks",
                            "protected", "ar"})
    width = _get(raw, "width", path, "integer")
    height = _get(raw, "height", path, "integer")
    spec = Spec(width, height)
    for i, d in enumerate(raw.get("data", [])):
        spec.datasets.append(_parse_dataset(d, f"{path}.data[{i}]" if path else f"data[{i}]"))
    for i, s in enumerate(raw.get("scales", [])):
        spec.scales.append(_parse_scale(s, f"{path}.scales[{i}]" if path else f"scales[{i}]"))
    for i, m in enumerate(raw.get("marks", [])):
        spec.marks.append(_parse_mark(m, f"{path}.marks[{i}]" if path else f"marks[{i}]"))
    for i, r in enumerate(raw.get("protected", [])):
        spec.protected.append(_parse_rect(r, f"{path}.protected[{i}]" if path else f"protected[{i}]"))
    if "ar" in raw:
        spec.ar = _parse_ar(raw["ar"], f"{path}.ar" if path else "ar")
    return spec


def parse_spec(text: str | bytes) -> Spec:
    """Parse a UTF-8 JSON document into a Spec.

    Raises SpecSyntaxError for malformed JSON, UnknownFieldError for keys the
    grammar does not know, TypeMismatchError for wrong value shapes, and
    ModeConflictError when the ar block's shape contradicts its mode.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecSyntaxError(e.msg, e.lineno, e.colno) from None
    return _parse_spec_obj(raw, "")


# --------------------------------------------------------------------------
# schema validation
# --------------------------------------------------------------------------

def output_columns(t: TransformDecl, cols: list[str]) -> list[str]:
    """Columns present after applying transform `t` to a table with `cols`."""
    p = t.params
    if t.kind == "formula":
        return cols if p["as"] in cols else cols + [p["as"]]
    if t.kind == "aggregate":
        names = p.get("as") or [
            f"{op}_{f}" if op != "count" else "count"
            for op, f in zip(p["ops"], p["fields"])
        ]
        return list(p["groupby"]) + list(names)
    added = {
        "stack": ["y0", "y1"],
        "pie": ["startAngle", "endAngle"],
        "bin": ["bin0", "bin1"],
        "hierarchy": ["depth", "childCount"],
        "treelayout": ["x", "y", "depth"],
        "treemap": ["x0", "y0", "x1", "y1"],
    }.get(t.kind, [])
    return cols + [c for c in added if c not in cols]


def final_columns(ds: DatasetDecl) -> list[str]:
    cols = list(ds.columns)
    for t in ds.transforms:
        cols = output_columns(t, cols)
    return cols


def _check_transform_fields(ds: DatasetDecl, prefix: str, issues: list[SchemaIssue]):
    cols = list(ds.columns)
    for i, t in enumerate(ds.transforms):
        path = f"{prefix}.transform[{i}]"
        p = t.params
        needed: list[str] = []
        if t.kind in ("sort", "pie", "bin"):
            needed = [p["field"]]
        elif t.kind == "stack":
            needed = list(p["groupby"]) + [p["field"]]
            if p.get("sortField"):
                needed.append(p["sortField"])
        elif t.kind == "aggregate":
            needed = list(p["groupby"]) + [f for op, f in zip(p["ops"], p["fields"])
                                           if op != "count"]
            for j, op in enumerate(p["ops"]):
                if op not in AGG_OPS:
                    issues.append(SchemaIssue(
                        "bad-op", f"{path}.ops[{j}]",
                        f"unknown aggregate op '{op}'"))
            if len(p["ops"]) != len(p["fields"]):
                issues.append(SchemaIssue(
                    "bad-op", f"{path}.ops", "ops and fields differ in length"))
            if p.get("as") is not None and len(p["as"]) != len(p["ops"]):
                issues.append(SchemaIssue(
                    "bad-op", f"{path}.as", "as and ops differ in length"))
        elif t.kind == "hierarchy":
            needed = [p["idField"], p["parentField"]]
        elif t.kind == "treelayout":
            needed = [p["idField"], p["parentField"]]
            if p["method"] not in ("tidy", "cluster"):
                issues.append(SchemaIssue(
                    "bad-method", f"{path}.method",
                    "treelayout method must be 'tidy' or 'cluster'"))
        elif t.kind == "treemap":
            needed = [p["idField"], p["parentField"], p["valueField"]]
            if p.get("method", "slice-dice") != "slice-dice":
                issues.append(SchemaIssue(
                    "bad-method", f"{path}.method",
                    "treemap method must be 'slice-dice'"))
        elif t.kind == "sort" and p.get("order") not in (None, "ascending", "descending"):
            issues.append(SchemaIssue("bad-order", f"{path}.order",
                                      "order must be ascending|descending"))
        for f in needed:
            if f not in cols:
                issues.append(SchemaIssue(
                    "missing-field", path,
                    f"transform '{t.kind}' references missing field '{f}'"))
        if t.kind == "bin":
            extent = p.get("extent", "auto")
            if isinstance(extent, list) and extent[0] > extent[1]:
                issues.append(SchemaIssue("bad-range", f"{path}.extent",
                                          "extent lo must be <= hi"))
            if p.get("maxbins", 10) < 1:
                issues.append(SchemaIssue("bad-count", f"{path}.maxbins",
                                          "maxbins must be >= 1"))
        cols = output_columns(t, cols)


def _check_placeholder(ph: PlaceholderSpec, path: str, issues: list[SchemaIssue]):
    if ph.count < 0:
        issues.append(SchemaIssue("bad-count", f"{path}.count",
                                  "count must be >= 0"))
    if ph.seed < 0 or ph.seed >= 2 ** 64:
        issues.append(SchemaIssue("bad-seed", f"{path}.seed",
                                  "seed must fit in uint64"))
    for i, f in enumerate(ph.fields):
        fp = f"{path}.fields[{i}]"
        if f.kind == "categorical":
            if f.options is not None:
                if not f.options:
                    issues.append(SchemaIssue("bad-options", f"{fp}.options",
                                              "options must be non-empty"))
            elif f.pattern is None or f.pattern.count("*") != 1:
                issues.append(SchemaIssue(
                    "bad-pattern", f"{fp}.pattern",
                    "categorical pattern must contain exactly one '*'"))
        elif f.kind == "quantitative":
            if f.range is None:
                issues.append(SchemaIssue("bad-range", f"{fp}.range",
                                          "quantitative field needs range"))
            elif f.range[0] > f.range[1]:
                issues.append(SchemaIssue("bad-range", f"{fp}.range",
                                          "range lo must be <= hi"))
        elif f.kind == "temporal":
            if f.span is None:
                issues.append(SchemaIssue("bad-span", f"{fp}.span",
                                          "temporal field needs span"))
            else:
                from .augment import parse_iso  # local to avoid cycle at import
                try:
                    lo = parse_iso(f.span[0])
                    hi = parse_iso(f.span[1])
                    if lo > hi:
                        issues.append(SchemaIssue("bad-span", f"{fp}.span",
                                                  "span start must be <= end"))
                except ValueError:
                    issues.append(SchemaIssue("bad-span", f"{fp}.span",
                                              "span bounds must be ISO dates"))
                if f.span[2] <= 0:
                    issues.append(SchemaIssue("bad-span", f"{fp}.span",
                                              "span step must be > 0"))


def validate_schema(spec: Spec, _path: str = "") -> list[SchemaIssue]:
    """Check every structural invariant; returns issues instead of raising."""
    issues: list[SchemaIssue] = []
    pre = _path

    def path(p: str) -> str:
        return f"{pre}.{p}" if pre else p

    if spec.width <= 0 or spec.height <= 0:
        issues.append(SchemaIssue("bad-dimension", path("width"),
                                  "width and height must be > 0"))
    seen = set()
    for i, ds in enumerate(spec.datasets):
        if ds.name in seen:
            issues.append(SchemaIssue("duplicate-dataset", path(f"data[{i}]"),
                                      f"duplicate dataset '{ds.name}'"))
        seen.add(ds.name)
        for j, row in enumerate(ds.values):
            if set(row) != set(ds.columns):
                issues.append(SchemaIssue(
                    "heterogeneous-rows", path(f"data[{i}].values[{j}]"),
                    "row fields do not match dataset columns"))
                break
        _check_transform_fields(ds, path(f"data[{i}]"), issues)

    finals = {ds.name: final_columns(ds) for ds in spec.datasets}

    for i, sc in enumerate(spec.scales):
        p = path(f"scales[{i}]")
        if isinstance(sc.domain, DataRef):
            if sc.domain.data not in finals:
                issues.append(SchemaIssue("missing-dataset", f"{p}.domain",
                                          f"unknown dataset '{sc.domain.data}'"))
            elif sc.domain.field not in finals[sc.domain.data]:
                issues.append(SchemaIssue(
                    "missing-field", f"{p}.domain",
                    f"dataset '{sc.domain.data}' has no field '{sc.domain.field}'"))
        elif sc.kind == "linear":
            if len(sc.domain) != 2:
                issues.append(SchemaIssue("bad-range", f"{p}.domain",
                                          "linear domain must be [lo, hi]"))
            elif not sc.domain[0] < sc.domain[1]:
                issues.append(SchemaIssue("bad-range", f"{p}.domain",
                                          "linear domain needs lo < hi"))
        else:
            vals = list(sc.domain)
            if len(set(map(repr, vals))) != len(vals):
                issues.append(SchemaIssue("duplicate-domain", f"{p}.domain",
                                          "domain values must be unique"))
        if sc.kind in ("linear", "band", "point"):
            if not (isinstance(sc.range, list) and len(sc.range) == 2
                    and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                            for v in sc.range)):
                issues.append(SchemaIssue("bad-range", f"{p}.range",
                                          "range must be [lo, hi] pixels"))
            elif sc.kind in ("band", "point") and not sc.range[0] < sc.range[1]:
                issues.append(SchemaIssue("bad-range", f"{p}.range",
                                          "band/point range needs lo < hi"))

    scale_names = {s.name for s in spec.scales}
    for i, mk in enumerate(spec.marks):
        p = path(f"marks[{i}]")
        if mk.source not in finals:
            issues.append(SchemaIssue("missing-dataset", f"{p}.from",
                                      f"unknown dataset '{mk.source}'"))
        for ch_name, ch in mk.encode.items():
            cp = f"{p}.encode.{ch_name}"
            if ch.scale is not None and ch.scale not in scale_names:
                issues.append(SchemaIssue("missing-scale", cp,
                                          f"unknown scale '{ch.scale}'"))
            if (ch.field is not None and mk.source in finals
                    and ch.field not in finals[mk.source]):
                issues.append(SchemaIssue(
                    "missing-field", cp,
                    f"dataset '{mk.source}' has no field '{ch.field}'"))
            if ch.band is not None and ch.scale is None:
                issues.append(SchemaIssue("bad-channel", cp,
                                          "band needs a scale"))

    for i, r in enumerate(spec.protected):
        if r.w < 0 or r.h < 0:
            issues.append(SchemaIssue("bad-rect", path(f"protected[{i}]"),
                                      "w and h must be >= 0"))

    if spec.ar is not None:
        _check_ar(spec, path("ar"), issues)
    return issues


def _check_ar(spec: Spec, path: str, issues: list[SchemaIssue]):
    ar = spec.ar
    if ar.mode == "extend":
        if ar.nested is not None:
            issues.append(SchemaIssue("mode-conflict", f"{path}.nested",
                                      "mode 'extend' does not take a nested spec"))
        if not ar.appends:
            issues.append(SchemaIssue("mode-conflict", f"{path}.appends",
                                      "mode 'extend' requires appends"))
    elif ar.mode == "smallMultiple":
        if ar.nested is not None:
            issues.append(SchemaIssue("mode-conflict", f"{path}.nested",
                                      "mode 'smallMultiple' does not take a nested spec"))
        if not ar.appends:
            issues.append(SchemaIssue("mode-conflict", f"{path}.appends",
                                      "mode 'smallMultiple' requires replacement datasets"))
    else:
        if ar.nested is None:
            issues.append(SchemaIssue("mode-conflict", f"{path}.nested",
                                      f"mode '{ar.mode}' requires a nested spec"))

    dataset_names = {d.name for d in spec.datasets}
    for i, a in enumerate(ar.appends):
        ap = f"{path}.appends[{i}]"
        if a.dataset not in dataset_names:
            issues.append(SchemaIssue("missing-dataset", f"{ap}.dataset",
                                      f"unknown dataset '{a.dataset}'"))
        elif a.values is not None:
            cols = set(spec.dataset(a.dataset).columns)
            for j, row in enumerate(a.values):
                if set(row) != cols:
                    bad = (set(row) ^ cols) or {"?"}
                    issues.append(SchemaIssue(
                        "append-mismatch", f"{ap}.values[{j}]",
                        f"append row does not match dataset columns "
                        f"(field '{sorted(bad)[0]}')"))
                    break
        if a.placeholder is not None:
            _check_placeholder(a.placeholder, f"{ap}.placeholder", issues)

    if ar.placement is not None and ar.placement.gap < 0:
        issues.append(SchemaIssue("bad-gap", f"{path}.placement.gap",
                                  "gap must be >= 0"))

    if ar.anchor is not None:
        x, y, w, h = ar.anchor.box
        if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > spec.width or y + h > spec.height:
            issues.append(SchemaIssue(
                "anchor-out-of-bounds", f"{path}.anchor.box",
                "anchor box must lie inside the canvas"))

    if ar.nested is not None:
        if ar.nested.ar is not None:
            issues.append(SchemaIssue("nested-ar", f"{path}.nested.ar",
                                      "nested spec must not declare its own ar block"))
        issues.extend(validate_schema(ar.nested, f"{path}.nested"))


# --------------------------------------------------------------------------
# canonical form
# --------------------------------------------------------------------------

def _channel_dict(ch: ChannelDef) -> dict:
    d: dict[str, Any] = {}
    if ch.scale is not None:
        d["scale"] = ch.scale
    if ch.field is not None:
        d["field"] = ch.field
    if ch.has_value:
        d["value"] = ch.value
    if ch.band is not None:
        d["band"] = ch.band
    return d


def _placement_dict(p: Placement) -> dict:
    d: dict[str, Any] = {"direction": p.direction, "dx": p.dx, "dy": p.dy,
                         "gap": p.gap}
    if p.width_hint is not None:
        d["widthHint"] = p.width_hint
    if p.height_hint is not None:
        d["heightHint"] = p.height_hint
    return d


def _placeholder_dict(ph: PlaceholderSpec) -> dict:
    fields = []
    for f in ph.fields:
        fd: dict[str, Any] = {"name": f.name, "kind": f.kind}
        if f.pattern is not None:
            fd["pattern"] = f.pattern
        if f.range is not None:
            fd["range"] = f.range
        if f.span is not None:
            fd["span"] = f.span
        if f.options is not None:
            fd["options"] = f.options
        fields.append(fd)
    return {"count": ph.count, "fields": fields, "seed": ph.seed}


def spec_to_dict(spec: Spec) -> dict:
    """Plain-JSON representation used by canonicalize and the hub."""
    d: dict[str, Any] = {"width": spec.width, "height": spec.height}
    if spec.datasets:
        d["data"] = []
        for ds in spec.datasets:
            dd: dict[str, Any] = {"name": ds.name, "fields": list(ds.columns),
                                  "values": [dict(r) for r in ds.values]}
            if ds.transforms:
                dd["transform"] = [{"kind": t.kind, **t.params}
                                   for t in ds.transforms]
            d["data"].append(dd)
    if spec.scales:
        d["scales"] = []
        for sc in spec.scales:
            sd: dict[str, Any] = {"name": sc.name, "kind": sc.kind}
            if isinstance(sc.domain, DataRef):
                sd["domain"] = {"data": sc.domain.data, "field": sc.domain.field}
            else:
                sd["domain"] = list(sc.domain)
            sd["range"] = sc.range if isinstance(sc.range, str) else list(sc.range)
            if sc.padding_inner is not None:
                sd["paddingInner"] = sc.padding_inner
            if sc.padding_outer is not None:
                sd["paddingOuter"] = sc.padding_outer
            d["scales"].append(sd)
    if spec.marks:
        d["marks"] = [{"kind": m.kind, "from": m.source,
                       "encode": {k: _channel_dict(v) for k, v in m.encode.items()}}
                      for m in spec.marks]
    if spec.protected:
        d["protected"] = []
        for r in spec.protected:
            rd: dict[str, Any] = {"x": r.x, "y": r.y, "w": r.w, "h": r.h}
            if r.label is not None:
                rd["label"] = r.label
            d["protected"].append(rd)
    if spec.ar is not None:
        ar = spec.ar
        ad: dict[str, Any] = {"mode": ar.mode}
        if ar.appends:
            ad["appends"] = []
            for a in ar.appends:
                entry: dict[str, Any] = {"dataset": a.dataset}
                if a.values is not None:
                    entry["values"] = [dict(r) for r in a.values]
                if a.placeholder is not None:
                    entry["placeholder"] = _placeholder_dict(a.placeholder)
                ad["appends"].append(entry)
        if ar.nested is not None:
            ad["nested"] = spec_to_dict(ar.nested)
        if ar.placement is not None:
            ad["placement"] = _placement_dict(ar.placement)
        if ar.anchor is not None:
            ad["anchor"] = {"box": list(ar.anchor.box)}
        d["ar"] = ad
    return d


def canonicalize(spec: Spec) -> str:
    """Deterministic serialization: sorted keys, no insignificant whitespace,
    arrays order-preserved, numbers in shortest round-trip form."""
    return json.dumps(spec_to_dict(spec), sort_keys=True,
                      separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(spec: Spec) -> bytes:
    return canonicalize(spec).encode("utf-8")
