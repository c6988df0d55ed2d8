"""End-to-end compilation: document -> traces -> scales -> scenes -> SVG.

This is the shared engine behind the CLI, the hub service, and the validator.
Everything here is pure given (spec, seed), which is what makes published
artifacts reproducible byte for byte.
"""

import copy
import hashlib
from dataclasses import dataclass, field

from . import dataflow, scales as scales_mod
from .augment import (
    AugmentationClass,
    ComposedScene,
    build_augmented_spec,
    classify_augmentation,
    compose_preview,
    default_placement,
    expand_placeholders,
    replacement_spec,
    strip_ar,
)
from .errors import InvalidSpecError
from .scales import ResolvedScale
from .scene import SceneGraph, encode_marks
from .specmodel import Spec, canonical_bytes, parse_spec, validate_schema
from .svgout import (
    STATIC_BORDER,
    VIRTUAL_BORDER,
    anchor_glyph,
    emit_document,
    emit_svg,
)

ANCHOR_FORMAT_VERSION = 1
_DEFAULT_ANCHOR_SIZE = 40.0


@dataclass
class LayerBundle:
    spec: Spec
    traces: dict[str, dataflow.DataflowTrace]
    scales: dict[str, ResolvedScale]
    scene: SceneGraph


@dataclass
class CompileResult:
    spec: Spec                      # placeholders expanded
    base: LayerBundle
    mode: AugmentationClass | None = None
    aug: LayerBundle | None = None  # extend-mode full augmented bundle
    virtual: SceneGraph | None = None
    composed: ComposedScene | None = None
    multiples: list[LayerBundle] = field(default_factory=list)


def compile_layer(spec: Spec, layer: str = "static") -> LayerBundle:
    tables = dataflow.tables_from_spec(spec)
    traces = dataflow.run_pipeline(spec, tables)
    resolved = scales_mod.resolve_scales(spec, traces)
    scene = encode_marks(spec, traces, resolved, layer)
    return LayerBundle(spec, traces, resolved, scene)


def _compile_extend(spec: Spec, base: LayerBundle) -> tuple[LayerBundle, SceneGraph]:
    _, aug_spec = build_augmented_spec(spec)
    tables = dataflow.tables_from_spec(aug_spec)
    traces = dataflow.run_pipeline(aug_spec, tables)
    resolved = scales_mod.resolve_scales(aug_spec, traces, base.scales)
    scene = encode_marks(aug_spec, traces, resolved, "auto")
    bundle = LayerBundle(aug_spec, traces, resolved, scene)
    virtual = SceneGraph(scene.width, scene.height, scene.layer_items("virtual"))
    return bundle, virtual


def compile_spec(spec: Spec, seed: int | None = None) -> CompileResult:
    """Compile a parsed, schema-valid spec into all render-ready layers."""
    issues = validate_schema(spec)
    if issues:
        raise InvalidSpecError(issues)

    work = copy.deepcopy(spec)
    if work.ar is not None:
        work.ar = expand_placeholders(work.ar, seed)

    base = compile_layer(strip_ar(work) if work.ar else work, "static")
    result = CompileResult(work, base)
    if work.ar is None:
        return result

    mode = classify_augmentation(work)
    result.mode = mode
    placement = work.ar.placement or default_placement(mode.mode)

    if mode.mode == "extend":
        result.aug, result.virtual = _compile_extend(work, base)
        result.composed = compose_preview(base.scene, result.virtual, placement)
    elif mode.mode in ("composite", "multipleView"):
        nested = compile_layer(work.ar.nested, "virtual")
        result.virtual = nested.scene
        result.composed = compose_preview(
            base.scene, nested.scene, placement,
            (nested.scene.width, nested.scene.height))
        result.multiples = [nested]
    else:  # smallMultiple
        strip = SceneGraph(0.0, 0.0)
        horizontal = placement.direction in ("right", "left", "overlay")
        offset = 0.0
        for a in work.ar.appends:
            sub = compile_layer(replacement_spec(work, a), "virtual")
            result.multiples.append(sub)
            dx, dy = (offset, 0.0) if horizontal else (0.0, offset)
            strip.items.extend(it.translated(dx, dy) for it in sub.scene.items)
            offset += (sub.scene.width if horizontal else sub.scene.height) + placement.gap
        k = len(work.ar.appends)
        if horizontal:
            strip.width = k * base.scene.width + (k - 1) * placement.gap
            strip.height = base.scene.height
        else:
            strip.width = base.scene.width
            strip.height = k * base.scene.height + (k - 1) * placement.gap
        result.virtual = strip
        result.composed = compose_preview(base.scene, strip, placement,
                                          (strip.width, strip.height))
    return result


def compile_document(text: str | bytes, seed: int | None = None) -> CompileResult:
    return compile_spec(parse_spec(text), seed)


# --------------------------------------------------------------------------
# rendered artifacts
# --------------------------------------------------------------------------

def spec_id(spec: Spec) -> str:
    """Content address: first 64 bits of SHA-256 of the canonical bytes."""
    return hashlib.sha256(canonical_bytes(spec)).hexdigest()[:16]


def anchor_box(spec: Spec) -> list[float]:
    if spec.ar is not None and spec.ar.anchor is not None:
        return [float(v) for v in spec.ar.anchor.box]
    s = min(_DEFAULT_ANCHOR_SIZE, float(spec.width), float(spec.height))
    return [max(0.0, spec.width - s), max(0.0, spec.height - s), s, s]


def anchor_payload(spec: Spec, version: int = 1, hub: str = "") -> dict:
    return {
        "papar": ANCHOR_FORMAT_VERSION,
        "id": spec_id(spec),
        "ver": version,
        "hub": hub,
        "box": anchor_box(spec),
    }


def render_static(result: CompileResult, payload: dict | None = None) -> str:
    """The printable static layer. When the spec declares an augmentation the
    anchor tag is inscribed so viewers can link the print to its hub record."""
    extra = ""
    if result.spec.ar is not None and payload is not None:
        extra = anchor_glyph(payload, payload["box"])
    scene = result.base.scene
    return emit_document(
        [("static", scene.items, (0.0, 0.0))],
        (0.0, 0.0, scene.width, scene.height),
        extra=extra)


def render_virtual(result: CompileResult) -> str:
    """The AR layer alone, in composed coordinates."""
    composed = result.composed
    if composed is None or result.virtual is None:
        return emit_document([], (0.0, 0.0, result.base.scene.width,
                                  result.base.scene.height))
    return emit_document(
        [("virtual", result.virtual.items, composed.offset)],
        composed.view_box)


def render_preview(result: CompileResult, border_boxes: bool = True) -> str:
    """Composed desktop preview: static + virtual with layer border boxes."""
    if result.composed is None:
        return emit_svg(result.base.scene, border_boxes=border_boxes)
    composed = result.composed
    groups = [("static", composed.static.items, (0.0, 0.0)),
              ("virtual", composed.virtual.items, composed.offset)]
    borders = []
    if border_boxes:
        if composed.static.items:
            borders.append((STATIC_BORDER,
                            (0.0, 0.0, composed.static.width, composed.static.height)))
        if composed.virtual.items and composed.virtual_rect is not None:
            borders.append((VIRTUAL_BORDER, composed.virtual_rect))
    return emit_document(groups, composed.view_box, borders)
