from __future__ import annotations

from xml.etree.ElementTree import Element, SubElement, tostring

from .quad import normal_quantile
from .schemas import Study, ThetaSummary

SVG_NS = "http://www.w3.org/2000/svg"

WIDTH = 640
ROW_HEIGHT = 28
TOP = 36
BOTTOM = 40
LABEL_WIDTH = 180
RIGHT_PAD = 24
POINT_SIZE = 6


def build_forest_svg(
    studies: list[Study],
    shrinkage: list[ThetaSummary] | None = None,
    level: float = 0.95,
    title: str | None = None,
) -> str:
    """Forest plot: one row per study (y +/- z*sigma) and one per shrinkage estimate.

    The output depends only on the inputs: fixed viewBox, no font metrics.
    """
    shrinkage = shrinkage or []
    z = normal_quantile(0.5 * (1.0 + level))
    rows = [("study", s.label, s.y, s.y - z * s.sigma, s.y + z * s.sigma) for s in studies]
    rows += [("shrinkage", f"{t.label} (shrunk)", t.mean, t.lo, t.hi) for t in shrinkage]

    lo = min(r[3] for r in rows)
    hi = max(r[4] for r in rows)
    pad = 0.05 * (hi - lo) or 1.0
    lo, hi = lo - pad, hi + pad
    plot_left, plot_right = LABEL_WIDTH, WIDTH - RIGHT_PAD

    def sx(v: float) -> float:
        return plot_left + (v - lo) / (hi - lo) * (plot_right - plot_left)

    height = TOP + ROW_HEIGHT * len(rows) + BOTTOM
    svg = Element("svg", {
        "xmlns": SVG_NS,
        "viewBox": f"0 0 {WIDTH} {height}",
        "width": str(WIDTH),
        "height": str(height),
        "font-family": "sans-serif",
        "font-size": "12",
    })
    if title:
        _text(svg, WIDTH / 2, 20, title, anchor="middle")

    if lo < 0 < hi:
        SubElement(svg, "line", {
            "class": "reference",
            "x1": _fmt(sx(0.0)), "x2": _fmt(sx(0.0)),
            "y1": str(TOP), "y2": str(TOP + ROW_HEIGHT * len(rows)),
            "stroke": "#999", "stroke-dasharray": "4 3",
        })

    for n, (kind, label, point, r_lo, r_hi) in enumerate(rows):
        y = TOP + ROW_HEIGHT * n + ROW_HEIGHT / 2
        color = "#b2182b" if kind == "shrinkage" else "#222"
        g = SubElement(svg, "g", {
            "class": kind,
            "data-label": label,
            "data-point": f"{point:.6f}",
            "data-lo": f"{r_lo:.6f}",
            "data-hi": f"{r_hi:.6f}",
        })
        _text(g, 8, y + 4, label)
        SubElement(g, "line", {
            "x1": _fmt(sx(r_lo)), "x2": _fmt(sx(r_hi)),
            "y1": _fmt(y), "y2": _fmt(y),
            "stroke": color, "stroke-width": "1.5",
        })
        if kind == "shrinkage":
            h = POINT_SIZE
            pts = [(sx(point) - h, y), (sx(point), y - h), (sx(point) + h, y), (sx(point), y + h)]
            SubElement(g, "polygon", {
                "points": " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts),
                "fill": color,
            })
        else:
            SubElement(g, "rect", {
                "x": _fmt(sx(point) - POINT_SIZE / 2), "y": _fmt(y - POINT_SIZE / 2),
                "width": str(POINT_SIZE), "height": str(POINT_SIZE),
                "fill": color,
            })

    axis_y = TOP + ROW_HEIGHT * len(rows) + 8
    SubElement(svg, "line", {
        "class": "axis",
        "x1": _fmt(plot_left), "x2": _fmt(plot_right),
        "y1": _fmt(axis_y), "y2": _fmt(axis_y),
        "stroke": "#222",
    })
    _text(svg, plot_left, axis_y + 16, f"{lo:.2f}", anchor="start")
    _text(svg, plot_right, axis_y + 16, f"{hi:.2f}", anchor="end")

    return '<?xml version="1.0" encoding="UTF-8"?>\n' + tostring(svg, encoding="unicode") + "\n"


def _text(parent: Element, x: float, y: float, text: str, anchor: str = "start") -> None:
    el = SubElement(parent, "text", {"x": _fmt(x), "y": _fmt(y), "text-anchor": anchor})
    el.text = text


def _fmt(v: float) -> str:
    """Format a coordinate, stripping trailing zeros."""
    if v == int(v):
        return str(int(v))
    return f"{v:.2f}".rstrip("0").rstrip(".")
