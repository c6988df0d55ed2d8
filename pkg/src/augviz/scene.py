"""Mark encoding: final dataflow stages + resolved scales -> scene graph."""

import hashlib
import json
import math
from dataclasses import dataclass, field

from .errors import ChannelScaleMismatchError, ScaleError
from .scales import ResolvedScale
from .specmodel import ChannelDef, MarkDecl, Spec

_STYLE_CHANNELS = {
    "fill": "fill",
    "stroke": "stroke",
    "strokeWidth": "stroke-width",
    "opacity": "opacity",
    "fontSize": "font-size",
}

_DEFAULT_TEXT_BOX = (80.0, 14.0)


@dataclass
class MarkItem:
    kind: str
    geometry: dict
    style: dict[str, str]
    layer: str  # "static" | "virtual"
    pid: int
    dataset: str
    mark_index: int
    text: str | None = None

    @property
    def style_id(self) -> str:
        payload = json.dumps(self.style, sort_keys=True, separators=(",", ":"))
        return hashlib.blake2b(payload.encode(), digest_size=4).hexdigest()

    def key(self) -> tuple:
        return (self.mark_index, self.dataset, self.pid)

    def bbox(self) -> tuple[float, float, float, float]:
        """Axis-aligned (x, y, w, h); arcs and lines are boxed coarsely."""
        g = self.geometry
        if self.kind == "rect" or self.kind == "text":
            return (g["x"], g["y"], g["w"], g["h"])
        if self.kind == "symbol":
            r = g["r"]
            return (g["cx"] - r, g["cy"] - r, 2 * r, 2 * r)
        if self.kind == "line":
            x = min(g["x1"], g["x2"])
            y = min(g["y1"], g["y2"])
            return (x, y, abs(g["x2"] - g["x1"]), abs(g["y2"] - g["y1"]))
        if self.kind == "arc":
            r = g["outerRadius"]
            return (g["cx"] - r, g["cy"] - r, 2 * r, 2 * r)
        return (g.get("x", 0.0), g.get("y", 0.0), 0.0, 0.0)  # path

    def translated(self, dx: float, dy: float) -> "MarkItem":
        g = dict(self.geometry)
        for kx, ky in (("x", "y"), ("cx", "cy"), ("x1", "y1"), ("x2", "y2")):
            if kx in g:
                g[kx] = g[kx] + dx
                g[ky] = g[ky] + dy
        return MarkItem(self.kind, g, dict(self.style), self.layer,
                        self.pid, self.dataset, self.mark_index, self.text)


@dataclass
class SceneGraph:
    width: float
    height: float
    items: list[MarkItem] = field(default_factory=list)

    def layer_items(self, layer: str) -> list[MarkItem]:
        return [it for it in self.items if it.layer == layer]

    def bounds(self) -> tuple[float, float, float, float] | None:
        if not self.items:
            return None
        boxes = [it.bbox() for it in self.items]
        x0 = min(b[0] for b in boxes)
        y0 = min(b[1] for b in boxes)
        x1 = max(b[0] + b[2] for b in boxes)
        y1 = max(b[1] + b[3] for b in boxes)
        return (x0, y0, x1 - x0, y1 - y0)


def _resolve_channel(ch: ChannelDef, row_cells: dict, scales, mark_name: str,
                     channel: str):
    if ch.band is not None:
        scale = scales.get(ch.scale)
        if scale is None or scale.kind != "band":
            raise ChannelScaleMismatchError(mark_name, channel,
                                            "band requires a band scale")
        return scale.bandwidth * ch.band
    raw = ch.value if ch.has_value else row_cells.get(ch.field)
    if ch.scale is None:
        return raw
    scale = scales.get(ch.scale)
    if scale is None:
        raise ChannelScaleMismatchError(mark_name, channel,
                                        f"unknown scale '{ch.scale}'")
    try:
        return scale.apply(raw)
    except ScaleError as e:
        raise ChannelScaleMismatchError(mark_name, channel, str(e)) from None


def _num(v, mark: str, channel: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ChannelScaleMismatchError(mark, channel,
                                        f"expected number, got {v!r}")
    if not math.isfinite(v):
        raise ChannelScaleMismatchError(mark, channel, "non-finite value")
    return float(v)


def _encode_one(mark: MarkDecl, mark_index: int, row, prev_point, scales,
                layer: str) -> MarkItem:
    name = f"marks[{mark_index}]"

    def ch(channel, default=None):
        if channel not in mark.encode:
            return default
        return _resolve_channel(mark.encode[channel], row.cells, scales,
                                name, channel)

    def numch(channel, default=None):
        v = ch(channel, default)
        if v is None:
            if channel in mark.encode:
                raise ChannelScaleMismatchError(name, channel,
                                                "channel resolved to null")
            return None
        return _num(v, name, channel)

    style = {}
    for channel, attr in _STYLE_CHANNELS.items():
        v = ch(channel)
        if v is not None:
            style[attr] = str(v)

    kind = mark.kind
    if kind == "rect":
        x = numch("x", 0.0)
        y = numch("y", 0.0)
        if "x2" in mark.encode:
            x2 = numch("x2")
            x, w = min(x, x2), abs(x2 - x)
        else:
            w = numch("width", 0.0)
        if "y2" in mark.encode:
            y2 = numch("y2")
            y, h = min(y, y2), abs(y2 - y)
        else:
            h = numch("height", 0.0)
        geometry = {"x": x, "y": y, "w": w, "h": h}
    elif kind == "symbol":
        geometry = {"cx": numch("x", 0.0), "cy": numch("y", 0.0),
                    "r": numch("r", 3.0)}
    elif kind == "line":
        x = numch("x", 0.0)
        y = numch("y", 0.0)
        px, py = prev_point if prev_point is not None else (x, y)
        geometry = {"x1": px, "y1": py, "x2": x, "y2": y}
    elif kind == "arc":
        if "startAngle" not in mark.encode or "endAngle" not in mark.encode:
            raise ChannelScaleMismatchError(name, "startAngle",
                                            "arc requires startAngle and endAngle")
        if "outerRadius" not in mark.encode:
            raise ChannelScaleMismatchError(name, "outerRadius",
                                            "arc requires outerRadius")
        geometry = {"cx": numch("x", 0.0), "cy": numch("y", 0.0),
                    "startAngle": numch("startAngle"),
                    "endAngle": numch("endAngle"),
                    "innerRadius": numch("innerRadius", 0.0),
                    "outerRadius": numch("outerRadius")}
    elif kind == "path":
        d = ch("path", "")
        if not isinstance(d, str):
            raise ChannelScaleMismatchError(name, "path", "path wants a string")
        geometry = {"x": numch("x", 0.0), "y": numch("y", 0.0), "d": d}
    elif kind == "text":
        geometry = {"x": numch("x", 0.0), "y": numch("y", 0.0),
                    "w": numch("w", _DEFAULT_TEXT_BOX[0]),
                    "h": numch("h", _DEFAULT_TEXT_BOX[1])}
    else:  # pragma: no cover - parse rejects unknown kinds
        raise ChannelScaleMismatchError(name, "kind", f"unknown mark {kind}")

    text = None
    if kind == "text":
        t = ch("text", "")
        text = "" if t is None else str(t)

    item_layer = layer
    if layer == "auto":
        item_layer = "virtual" if row.tag == "augment" else "static"
    return MarkItem(kind, geometry, style, item_layer, row.pid,
                    mark.source, mark_index, text)


def encode_marks(spec: Spec, traces, scales: dict[str, ResolvedScale],
                 layer: str = "static") -> SceneGraph:
    """One item per final-stage row per mark declaration, in (mark, row)
    order. `layer` may be 'static', 'virtual', or 'auto' (per-row tag)."""
    scene = SceneGraph(float(spec.width), float(spec.height))
    for mark_index, mark in enumerate(spec.marks):
        trace = traces.get(mark.source)
        if trace is None:
            continue
        table = trace.final
        prev_point = None
        for row in table.rows:
            item = _encode_one(mark, mark_index, row, prev_point, scales, layer)
            if mark.kind == "line":
                prev_point = (item.geometry["x2"], item.geometry["y2"])
            scene.items.append(item)
    return scene
