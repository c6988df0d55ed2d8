"""Semantics of the `ar` block: classify the augmentation into its design-
space cell, expand wildcard placeholders deterministically, split one spec
into its static and augmented halves, and compose static + virtual scenes.
"""

import copy
import math
from dataclasses import dataclass
from datetime import datetime, timezone

from .errors import AppendSchemaMismatchError, ModeConflictError, NoArBlockError
from .scene import SceneGraph
from .specmodel import AppendDecl, ArBlock, Placement, PlaceholderSpec, Spec

#: mode -> (encodings, composition)
MODE_CELLS = {
    "extend": ("same", "integrated"),
    "composite": ("different", "integrated"),
    "smallMultiple": ("same", "separate"),
    "multipleView": ("different", "separate"),
}

_DEFAULT_SEPARATE_GAP = 20.0


@dataclass
class AugmentationClass:
    mode: str
    encodings: str    # same | different
    composition: str  # integrated | separate

    def to_dict(self):
        return {"mode": self.mode, "encodings": self.encodings,
                "composition": self.composition}


def classify_augmentation(spec: Spec) -> AugmentationClass:
    """Map the ar block onto the 2x2 design space; the block's shape must
    match its declared mode."""
    if spec.ar is None:
        raise NoArBlockError()
    ar = spec.ar
    if ar.mode in ("extend", "smallMultiple") and ar.nested is not None:
        raise ModeConflictError("ar.nested",
                                f"mode '{ar.mode}' does not take a nested spec")
    if ar.mode in ("composite", "multipleView") and ar.nested is None:
        raise ModeConflictError("ar.nested",
                                f"mode '{ar.mode}' requires a nested spec")
    if ar.mode in ("extend", "smallMultiple") and not ar.appends:
        raise ModeConflictError("ar.appends",
                                f"mode '{ar.mode}' requires appends")
    enc, comp = MODE_CELLS[ar.mode]
    return AugmentationClass(ar.mode, enc, comp)


# --------------------------------------------------------------------------
# placeholder expansion
# --------------------------------------------------------------------------

_LCG_MUL = 6364136223846793005
_LCG_ADD = 1442695040888963407
_U64 = 2 ** 64


class _Lcg:
    def __init__(self, seed: int):
        self.state = seed % _U64

    def uniform(self) -> float:
        self.state = (_LCG_MUL * self.state + _LCG_ADD) % _U64
        return (self.state >> 11) / 2 ** 53


def parse_iso(text: str) -> int:
    """ISO date or datetime -> epoch seconds (UTC assumed when unzoned)."""
    t = text.replace("Z", "+00:00")
    try:
        dt = datetime.fromisoformat(t)
    except ValueError:
        raise ValueError(f"not an ISO date: {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def expand_placeholder(ph: PlaceholderSpec, seed: int | None = None) -> list[dict]:
    """Deterministic mock rows. One uniform draw is consumed per cell in
    row-major field order, whether or not the field's generator uses it."""
    rng = _Lcg(ph.seed if seed is None else seed)
    rows = []
    for i in range(ph.count):
        row = {}
        for f in ph.fields:
            u = rng.uniform()
            if f.kind == "categorical":
                if f.options:
                    row[f.name] = f.options[min(int(u * len(f.options)),
                                                len(f.options) - 1)]
                else:
                    row[f.name] = f.pattern.replace("*", str(i + 1), 1)
            elif f.kind == "quantitative":
                lo, hi = f.range
                row[f.name] = lo + u * (hi - lo)
            else:  # temporal
                start = parse_iso(f.span[0])
                end = parse_iso(f.span[1])
                step = f.span[2]
                n_steps = (end - start) / step
                row[f.name] = start + math.floor(u * n_steps) * step
        rows.append(row)
    return rows


def expand_placeholders(ar: ArBlock, seed: int | None = None) -> ArBlock:
    """Return a copy of the block with every placeholder turned into concrete
    values. `seed` overrides each placeholder's own seed when given."""
    out = copy.deepcopy(ar)
    for a in out.appends:
        if a.placeholder is not None:
            a.values = expand_placeholder(a.placeholder, seed)
            a.placeholder = None
    return out


# --------------------------------------------------------------------------
# augmented-spec construction
# --------------------------------------------------------------------------

def strip_ar(spec: Spec) -> Spec:
    base = copy.deepcopy(spec)
    base.ar = None
    return base


def _check_append(spec: Spec, a: AppendDecl) -> None:
    ds = spec.dataset(a.dataset)
    if ds is None:
        raise AppendSchemaMismatchError(a.dataset, "*")
    cols = set(ds.columns)
    for row in a.values or []:
        if set(row) != cols:
            bad = (set(row) ^ cols) or {"?"}
            raise AppendSchemaMismatchError(a.dataset, sorted(bad)[0])


def build_augmented_spec(spec: Spec) -> tuple[Spec, Spec]:
    """Split into (baseSpec, augSpec). Placeholders must already be expanded.

    extend       -> same spec with append rows attached as augment values
    composite /
    multipleView -> augSpec is the nested spec, compiled independently
    smallMultiple-> augSpec is the base encodings; callers re-instantiate it
                    once per replacement dataset (see compiler.small_multiples)
    """
    if spec.ar is None:
        raise NoArBlockError()
    classify_augmentation(spec)  # shape check
    ar = spec.ar
    base = strip_ar(spec)

    if ar.mode == "extend":
        aug = strip_ar(spec)
        for a in ar.appends:
            _check_append(spec, a)
            aug.dataset(a.dataset).augment_values.extend(
                [dict(r) for r in a.values or []])
        return base, aug

    if ar.mode in ("composite", "multipleView"):
        return base, copy.deepcopy(ar.nested)

    # smallMultiple: validate replacement schemas; the template is the base
    for a in ar.appends:
        _check_append(spec, a)
    return base, strip_ar(spec)


def replacement_spec(base: Spec, append: AppendDecl) -> Spec:
    """Small-multiple instantiation: base encodings over one replacement
    dataset."""
    out = copy.deepcopy(base)
    out.ar = None
    ds = out.dataset(append.dataset)
    ds.values = [dict(r) for r in append.values or []]
    ds.augment_values = []
    return out


# --------------------------------------------------------------------------
# composition
# --------------------------------------------------------------------------

def default_placement(mode: str) -> Placement:
    if mode in ("extend", "composite"):
        return Placement("overlay", 0, 0, 0)
    return Placement("right", 0, 0, _DEFAULT_SEPARATE_GAP)


@dataclass
class ComposedScene:
    static: SceneGraph
    virtual: SceneGraph
    offset: tuple[float, float]
    virtual_rect: tuple[float, float, float, float] | None
    view_box: tuple[float, float, float, float]

    def virtual_items_absolute(self):
        dx, dy = self.offset
        return [it.translated(dx, dy) for it in self.virtual.items]


def _union(a, b):
    x0 = min(a[0], b[0])
    y0 = min(a[1], b[1])
    x1 = max(a[0] + a[2], b[0] + b[2])
    y1 = max(a[1] + a[3], b[1] + b[3])
    return (x0, y0, x1 - x0, y1 - y0)


def compose_preview(static: SceneGraph, virtual: SceneGraph,
                    placement: Placement | None,
                    virtual_size: tuple[float, float] | None = None
                    ) -> ComposedScene:
    """The visual-composite operator: place the virtual layer relative to the
    static canvas. Static items are never transformed."""
    p = placement or Placement("overlay", 0, 0, 0)
    sw, sh = static.width, static.height
    if virtual_size is not None:
        vw, vh = virtual_size
    else:
        b = virtual.bounds()
        vw, vh = (b[2], b[3]) if b else (0.0, 0.0)
    if p.width_hint is not None:
        vw = p.width_hint
    if p.height_hint is not None:
        vh = p.height_hint

    if p.direction == "right":
        dx, dy = sw + p.gap, p.dy
    elif p.direction == "left":
        dx, dy = -(vw + p.gap), p.dy
    elif p.direction == "top":
        dx, dy = p.dx, -(vh + p.gap)
    elif p.direction == "bottom":
        dx, dy = p.dx, sh + p.gap
    else:  # overlay
        dx, dy = p.dx, p.dy

    static_rect = (0.0, 0.0, sw, sh)
    if not virtual.items:
        return ComposedScene(static, virtual, (dx, dy), None, static_rect)

    if virtual_size is not None:
        virtual_rect = (dx, dy, vw, vh)
    else:
        b = virtual.bounds()
        virtual_rect = (b[0] + dx, b[1] + dy, b[2], b[3])
    return ComposedScene(static, virtual, (dx, dy), virtual_rect,
                         _union(static_rect, virtual_rect))
