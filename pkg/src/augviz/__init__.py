"""augviz: author once, print the static layer, augment it in AR.

A declarative chart document compiles into a static scene and a virtual
scene; the validator proves (or refutes) that the augmentation leaves the
printed layer untouched by diffing dataflow states; the hub hosts published
versions for viewers.
"""

from . import errors
from .augment import (
    AugmentationClass,
    ComposedScene,
    build_augmented_spec,
    classify_augmentation,
    compose_preview,
    expand_placeholder,
    expand_placeholders,
)
from .compiler import (
    CompileResult,
    anchor_payload,
    compile_document,
    compile_spec,
    render_preview,
    render_static,
    render_virtual,
    spec_id,
)
from .dataflow import (
    AUGMENT_PID_BASE,
    DataflowTrace,
    DataTable,
    Row,
    append_rows,
    apply_transform,
    ingest,
    run_pipeline,
)
from .expr import eval_expr, parse_expr
from .scales import ResolvedScale, resolve_scale, resolve_scales
from .scene import MarkItem, SceneGraph, encode_marks
from .specmodel import (
    ArBlock,
    Spec,
    SchemaIssue,
    canonical_bytes,
    canonicalize,
    parse_spec,
    validate_schema,
)
from .svgout import emit_svg
from .validator import (
    OracleReport,
    ValidationReport,
    check_scales,
    detect_occlusion,
    diff_traces,
    scene_oracle,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AUGMENT_PID_BASE", "ArBlock", "AugmentationClass", "CompileResult",
    "ComposedScene", "DataTable", "DataflowTrace", "MarkItem", "OracleReport",
    "ResolvedScale", "Row", "SceneGraph", "SchemaIssue", "Spec",
    "ValidationReport", "anchor_payload", "append_rows", "apply_transform",
    "build_augmented_spec", "canonical_bytes", "canonicalize", "check_scales",
    "classify_augmentation", "compile_document", "compile_spec",
    "compose_preview", "detect_occlusion", "diff_traces", "emit_svg",
    "encode_marks", "errors", "eval_expr", "expand_placeholder",
    "expand_placeholders", "ingest", "parse_expr", "parse_spec",
    "render_preview", "render_static", "render_virtual", "resolve_scale",
    "resolve_scales", "run_pipeline", "scene_oracle", "spec_id",
    "validate", "validate_schema",
]
