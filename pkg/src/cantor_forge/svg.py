"""SVG figure of a product approximant with a placed tree drawn on top.

Everything drawn comes from the placement JSON (the two specs, vertex boxes
and edge list), so the same placement always yields byte-identical output.
"""

from __future__ import annotations

from fractions import Fraction

from .cantor import CantorSpec
from .errors import InvalidParameter
from .kernels import approximant_intervals

MAX_RENDER_DEPTH = 6


def _f(v: float) -> str:
    return f"{v:.4f}".rstrip("0").rstrip(".") or "0"


def render_placement(placement: dict, *, depth: int = 4, size: int = 600, margin: int = 20) -> str:
    """Return SVG text for a tree placement (the dict emitted for a tree)."""
    if not 0 <= depth <= MAX_RENDER_DEPTH:
        raise InvalidParameter(f"render depth must lie in [0, {MAX_RENDER_DEPTH}]")
    K1 = CantorSpec.from_json(placement["K1"])
    K2 = CantorSpec.from_json(placement["K2"])
    x0, x1 = float(K1.lo), float(K1.hi)
    y0, y1 = float(K2.lo), float(K2.hi)
    sx = (size - 2 * margin) / (x1 - x0)
    sy = (size - 2 * margin) / (y1 - y0)

    def px(x: float) -> float:
        return margin + (x - x0) * sx

    def py(y: float) -> float:
        # SVG y grows downward
        return size - margin - (y - y0) * sy

    xs = approximant_intervals(K1, depth)
    ys = approximant_intervals(K2, depth)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        '<g fill="#c8c8c8" stroke="none">',
    ]
    for a, b in xs:
        for c, d in ys:
            out.append(
                f'<rect x="{_f(px(a))}" y="{_f(py(d))}" width="{_f((b - a) * sx)}" height="{_f((d - c) * sy)}"/>'
            )
    out.append("</g>")

    centers = {}
    for v in placement["vertices"]:
        b1 = [float(Fraction(s)) for s in v["box1"]]
        b2 = [float(Fraction(s)) for s in v["box2"]]
        centers[v["id"]] = ((b1[0] + b1[1]) / 2, (b2[0] + b2[1]) / 2)
    out.append('<g stroke="#b22222" stroke-width="1.2">')
    for e in placement.get("edges", []):
        (ax, ay), (bx, by) = centers[e["u"]], centers[e["v"]]
        out.append(f'<line x1="{_f(px(ax))}" y1="{_f(py(ay))}" x2="{_f(px(bx))}" y2="{_f(py(by))}"/>')
    out.append("</g>")
    out.append('<g fill="#1f3a93">')
    for vid, (cx, cy) in centers.items():
        out.append(f'<circle cx="{_f(px(cx))}" cy="{_f(py(cy))}" r="3"><title>{vid or "root"}</title></circle>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
