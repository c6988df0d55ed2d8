"""Deterministic SVG 1.1 output for scene graphs and composed previews.

Numbers are written with at most 6 decimal places, trailing zeros trimmed,
so equal scenes emit byte-identical documents on every platform. Layer groups
carry data-layer attributes and every item a data-pid; the validator's scene
oracle and the editor both key on those.
"""

import json
import math

from .scene import MarkItem, SceneGraph

STATIC_BORDER = "#FF8C00"
VIRTUAL_BORDER = "#1E90FF"

_XML_ESCAPES = [("&", "&amp;"), ("<", "&lt;"), (">", "&gt;"), ('"', "&quot;")]


def _esc(s: str) -> str:
    for raw, rep in _XML_ESCAPES:
        s = s.replace(raw, rep)
    return s


def fmt_num(v: float) -> str:
    if isinstance(v, int):
        return str(v)
    if v != v or math.isinf(v):  # scenes reject non-finite; belt and braces
        return "0"
    r = round(v, 6)
    if r == int(r):
        i = int(r)
        return str(i if i != 0 else 0)
    s = f"{r:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _attrs(pairs) -> str:
    return "".join(f' {k}="{_esc(str(v))}"' for k, v in pairs)


def _arc_path(g: dict) -> str:
    """Annular sector path. Angle 0 points up, positive angles go clockwise."""
    cx, cy = g["cx"], g["cy"]
    a0, a1 = g["startAngle"], g["endAngle"]
    r_in, r_out = g["innerRadius"], g["outerRadius"]

    def pt(angle, radius):
        return (cx + radius * math.sin(angle), cy - radius * math.cos(angle))

    if abs(a1 - a0) >= 2 * math.pi - 1e-9:
        # full ring: two half arcs to keep the path well defined
        mid = a0 + math.pi
        x0, y0 = pt(a0, r_out)
        xm, ym = pt(mid, r_out)
        d = (f"M{fmt_num(x0)},{fmt_num(y0)}"
             f"A{fmt_num(r_out)},{fmt_num(r_out)} 0 1 1 {fmt_num(xm)},{fmt_num(ym)}"
             f"A{fmt_num(r_out)},{fmt_num(r_out)} 0 1 1 {fmt_num(x0)},{fmt_num(y0)}")
        if r_in > 0:
            xi0, yi0 = pt(a0, r_in)
            xim, yim = pt(mid, r_in)
            d += (f"M{fmt_num(xi0)},{fmt_num(yi0)}"
                  f"A{fmt_num(r_in)},{fmt_num(r_in)} 0 1 0 {fmt_num(xim)},{fmt_num(yim)}"
                  f"A{fmt_num(r_in)},{fmt_num(r_in)} 0 1 0 {fmt_num(xi0)},{fmt_num(yi0)}")
        return d + "Z"

    large = 1 if abs(a1 - a0) > math.pi else 0
    sweep = 1 if a1 >= a0 else 0
    x0, y0 = pt(a0, r_out)
    x1, y1 = pt(a1, r_out)
    d = (f"M{fmt_num(x0)},{fmt_num(y0)}"
         f"A{fmt_num(r_out)},{fmt_num(r_out)} 0 {large} {sweep} "
         f"{fmt_num(x1)},{fmt_num(y1)}")
    if r_in > 0:
        xi1, yi1 = pt(a1, r_in)
        xi0, yi0 = pt(a0, r_in)
        d += (f"L{fmt_num(xi1)},{fmt_num(yi1)}"
              f"A{fmt_num(r_in)},{fmt_num(r_in)} 0 {large} {1 - sweep} "
              f"{fmt_num(xi0)},{fmt_num(yi0)}Z")
    else:
        d += f"L{fmt_num(cx)},{fmt_num(cy)}Z"
    return d


def _item_element(item: MarkItem) -> str:
    g = item.geometry
    base = [("data-dataset", item.dataset), ("data-pid", item.pid)]
    style = sorted(item.style.items())
    if item.kind == "rect":
        geo = [("x", fmt_num(g["x"])), ("y", fmt_num(g["y"])),
               ("width", fmt_num(g["w"])), ("height", fmt_num(g["h"]))]
        return f"<rect{_attrs(base + geo + style)}/>"
    if item.kind == "symbol":
        geo = [("cx", fmt_num(g["cx"])), ("cy", fmt_num(g["cy"])),
               ("r", fmt_num(g["r"]))]
        return f"<circle{_attrs(base + geo + style)}/>"
    if item.kind == "line":
        geo = [("x1", fmt_num(g["x1"])), ("y1", fmt_num(g["y1"])),
               ("x2", fmt_num(g["x2"])), ("y2", fmt_num(g["y2"]))]
        if "stroke" not in item.style:
            style = sorted(list(item.style.items()) + [("stroke", "#000000")])
        return f"<line{_attrs(base + geo + style)}/>"
    if item.kind == "arc":
        return f"<path{_attrs(base + [('d', _arc_path(g))] + style)}/>"
    if item.kind == "path":
        extra = []
        if g["x"] or g["y"]:
            extra.append(("transform",
                          f"translate({fmt_num(g['x'])},{fmt_num(g['y'])})"))
        return f"<path{_attrs(base + [('d', g['d'])] + extra + style)}/>"
    # text: draw at a fixed baseline inside the declared box
    geo = [("x", fmt_num(g["x"])), ("y", fmt_num(g["y"] + g["h"] * 0.8))]
    return (f"<text{_attrs(base + geo + style)}>"
            f"{_esc(item.text or '')}</text>")


def _border_rect(rect, color) -> str:
    x, y, w, h = rect
    attrs = [("x", fmt_num(x)), ("y", fmt_num(y)),
             ("width", fmt_num(w)), ("height", fmt_num(h)),
             ("fill", "none"), ("stroke", color), ("stroke-width", "2"),
             ("stroke-dasharray", "6,4"), ("data-border", "layer")]
    return f"<rect{_attrs(attrs)}/>"


def emit_document(groups, view_box, border_rects=(), extra: str = "") -> str:
    """Shared serializer. `groups` is a list of (layer, items, (dx, dy));
    empty groups are skipped entirely."""
    x, y, w, h = view_box
    out = ['<svg xmlns="http://www.w3.org/2000/svg" '
           f'viewBox="{fmt_num(x)} {fmt_num(y)} {fmt_num(w)} {fmt_num(h)}" '
           f'width="{fmt_num(w)}" height="{fmt_num(h)}">']
    for layer, items, offset in groups:
        if not items:
            continue
        dx, dy = offset
        transform = (f' transform="translate({fmt_num(dx)},{fmt_num(dy)})"'
                     if dx or dy else "")
        out.append(f'<g data-layer="{layer}"{transform}>')
        out.extend(_item_element(it) for it in items)
        out.append("</g>")
    for color, rect in border_rects:
        out.append(_border_rect(rect, color))
    if extra:
        out.append(extra)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(scene: SceneGraph, view_box=None, *, border_boxes: bool = False) -> str:
    """Deterministic document for one scene; items stay in scene order within
    their layer group (static first, then virtual)."""
    if view_box is None:
        view_box = (0.0, 0.0, scene.width, scene.height)
    groups = []
    for layer in ("static", "virtual"):
        items = scene.layer_items(layer)
        groups.append((layer, items, (0.0, 0.0)))
    borders = []
    if border_boxes:
        if groups[0][1]:
            borders.append((STATIC_BORDER, (0.0, 0.0, scene.width, scene.height)))
        if groups[1][1]:
            vb = SceneGraph(scene.width, scene.height, groups[1][1]).bounds()
            if vb is not None:
                borders.append((VIRTUAL_BORDER, vb))
    return emit_document(groups, view_box, borders)


def anchor_glyph(payload: dict, box) -> str:
    """Reserved machine-readable tag box: visible placeholder glyph plus the
    payload inscribed as a data attribute."""
    x, y, w, h = box
    data = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    inner = [
        f'<g data-anchor="{_esc(data)}">',
        f'<rect x="{fmt_num(x)}" y="{fmt_num(y)}" width="{fmt_num(w)}" '
        f'height="{fmt_num(h)}" fill="#FFFFFF" stroke="#000000"/>',
        f'<path d="M{fmt_num(x)},{fmt_num(y)}L{fmt_num(x + w)},{fmt_num(y + h)}'
        f'M{fmt_num(x)},{fmt_num(y + h)}L{fmt_num(x + w)},{fmt_num(y)}" '
        f'stroke="#000000" fill="none"/>',
        "</g>",
    ]
    return "\n".join(inner)
