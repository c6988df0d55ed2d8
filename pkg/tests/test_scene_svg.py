import json
from pathlib import Path

import pytest

from augviz import compile_spec, emit_svg, parse_spec, render_preview
from augviz.compiler import compile_layer
from augviz.errors import ChannelScaleMismatchError
from augviz.scene import SceneGraph
from augviz.svgout import fmt_num

from conftest import GOLDEN, fixture_spec


def bundle(name):
    spec = fixture_spec(name)
    return compile_layer(spec)


def test_encode_totality():
    b = bundle("bar_extend.pv.json")
    rows = sum(len(tr.final.rows) for tr in b.traces.values())
    assert len(b.scene.items) == rows == 4


def test_encode_band_positions():
    b = bundle("bar_extend.pv.json")
    first = b.scene.items[0]
    # band step = 300 / 4 = 75; x(A) = 40 + 0.05 * 75
    assert first.geometry["x"] == pytest.approx(43.75)
    assert first.geometry["w"] == pytest.approx(67.5)


def test_encode_arc_angles_flow_through():
    b = bundle("pie_extend.pv.json")
    a0 = b.scene.items[0].geometry
    assert a0["startAngle"] == pytest.approx(0.0)
    assert a0["endAngle"] == pytest.approx(1.5707963267948966)


def test_zero_row_dataset_empty_scene():
    spec = parse_spec(json.dumps({
        "width": 10, "height": 10,
        "data": [{"name": "t", "fields": ["v"], "values": []}],
        "scales": [],
        "marks": [{"kind": "symbol", "from": "t",
                   "encode": {"x": {"field": "v"}, "y": {"value": 1}}}],
    }))
    b = compile_layer(spec)
    assert b.scene.items == []


def test_line_marks_one_segment_per_row():
    b = bundle("composite_occlusion.pv.json")
    lines = [it for it in b.scene.items if it.kind == "line"]
    assert len(lines) == 4
    # first segment is degenerate, later ones chain
    assert lines[0].geometry["x1"] == lines[0].geometry["x2"]
    assert lines[1].geometry["x1"] == lines[0].geometry["x2"]
    assert lines[1].geometry["y1"] == lines[0].geometry["y2"]


def test_channel_scale_mismatch():
    spec = parse_spec(json.dumps({
        "width": 10, "height": 10,
        "data": [{"name": "t", "values": [{"v": 1}]}],
        "scales": [{"name": "y", "kind": "linear", "domain": [0, 1], "range": [0, 1]}],
        "marks": [{"kind": "rect", "from": "t",
                   "encode": {"x": {"scale": "y", "band": 1}}}],
    }))
    with pytest.raises(ChannelScaleMismatchError):
        compile_layer(spec)


def test_fmt_num():
    assert fmt_num(5.0) == "5"
    assert fmt_num(0.30000000000000004) == "0.3"
    assert fmt_num(-0.0) == "0"
    assert fmt_num(1.23456789) == "1.234568"
    assert fmt_num(12) == "12"


def test_empty_scene_svg():
    svg = emit_svg(SceneGraph(100, 50))
    assert svg == ('<svg xmlns="http://www.w3.org/2000/svg" '
                   'viewBox="0 0 100 50" width="100" height="50">\n</svg>\n')


def test_svg_deterministic():
    spec = fixture_spec("bar_extend.pv.json")
    a = render_preview(compile_spec(spec))
    b = render_preview(compile_spec(spec))
    assert a == b


def test_svg_layer_attributes():
    svg = render_preview(compile_spec(fixture_spec("bar_extend.pv.json")))
    assert 'data-layer="static"' in svg
    assert 'data-layer="virtual"' in svg
    assert 'data-pid="' in svg
    assert "#FF8C00" in svg and "#1E90FF" in svg


def test_preview_golden():
    got = render_preview(compile_spec(fixture_spec("bar_extend.pv.json")))
    assert got == (GOLDEN / "bar_extend.preview.svg").read_text("utf-8")


def test_static_golden():
    got = render_preview(compile_spec(fixture_spec("minimal_bar.pv.json")),
                         border_boxes=False)
    assert got == (GOLDEN / "minimal_bar.static.svg").read_text("utf-8")


def test_text_marks_use_declared_box():
    spec = parse_spec(json.dumps({
        "width": 100, "height": 40,
        "data": [{"name": "t", "values": [{"label": "hi & <bye>"}]}],
        "scales": [],
        "marks": [{"kind": "text", "from": "t", "encode": {
            "x": {"value": 4}, "y": {"value": 10},
            "w": {"value": 60}, "h": {"value": 12},
            "text": {"field": "label"}, "fontSize": {"value": 10}}}],
    }))
    b = compile_layer(spec)
    assert b.scene.items[0].bbox() == (4.0, 10.0, 60.0, 12.0)
    svg = emit_svg(b.scene)
    assert "hi &amp; &lt;bye&gt;" in svg


def test_svg_deterministic_across_processes():
    import hashlib
    import subprocess
    import sys
    from conftest import FIXTURES

    prog = (
        "import hashlib, pathlib, sys;"
        "from augviz import compile_spec, parse_spec, render_preview;"
        "spec = parse_spec(pathlib.Path(sys.argv[1]).read_text());"
        "print(hashlib.sha256(render_preview(compile_spec(spec)).encode()).hexdigest())"
    )
    digests = set()
    for seed in ("0", "1", "31337"):
        proc = subprocess.run(
            [sys.executable, "-c", prog, str(FIXTURES / "bar_extend.pv.json")],
            capture_output=True, text=True,
            env={"PYTHONHASHSEED": seed, "PATH": "/usr/bin:/bin",
                 "PYTHONPATH": str(Path(__file__).parent.parent / "src")})
        assert proc.returncode == 0, proc.stderr
        digests.add(proc.stdout.strip())
    local = render_preview(compile_spec(fixture_spec("bar_extend.pv.json")))
    digests.add(hashlib.sha256(local.encode()).hexdigest())
    assert len(digests) == 1
