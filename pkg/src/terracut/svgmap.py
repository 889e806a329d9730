"""Choropleth rendering to plain SVG text.

One <path> element per unit (multipolygon parts and holes become subpaths
under the even-odd fill rule), plus a legend. Output is a pure function of
the inputs: fixed coordinate formatting, sorted categories, no timestamps.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .errors import ValidationError
from .geometry import Geometry, MultiPolygon, Polygon, geometry_bounds

PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
    "#1f77b4", "#8c564b", "#e377c2", "#7f7f7f", "#17becf",
)

_RAMP_LO = (0xF7, 0xFB, 0xFF)
_RAMP_HI = (0x08, 0x30, 0x6B)

_LEGEND_W = 230
_PAD = 14


def _ramp(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    rgb = tuple(round(lo + t * (hi - lo)) for lo, hi in zip(_RAMP_LO, _RAMP_HI))
    return "#%02x%02x%02x" % rgb


def _fmt(v: float) -> str:
    return "%.2f" % v


def _label(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.4g" % v
    return str(v)


def choropleth_svg(
    geometries: list[Geometry],
    values,
    title: str = "",
    mode: str = "auto",
    unit_ids: list[str] | None = None,
    width: int = 1000,
) -> str:
    """Render one filled polygon per unit, coloured by ``values``.

    ``mode="categorical"`` assigns palette colours to sorted distinct
    values; ``mode="continuous"`` maps a float range onto a blue ramp;
    ``"auto"`` picks continuous exactly when the values are floats.
    """
    if len(geometries) == 0 or len(geometries) != len(values):
        raise ValidationError("need one value per geometry")
    if mode not in ("auto", "categorical", "continuous"):
        raise ValidationError(f"unknown mode {mode!r}")
    vals = np.asarray(values)
    if mode == "auto":
        mode = "continuous" if np.issubdtype(vals.dtype, np.floating) else "categorical"
    if mode == "continuous":
        vals = vals.astype(float)
        if not np.all(np.isfinite(vals)):
            raise ValidationError("continuous values must be finite")

    boxes = [geometry_bounds(g) for g in geometries]
    xmin = min(b[0] for b in boxes)
    ymin = min(b[1] for b in boxes)
    xmax = max(b[2] for b in boxes)
    ymax = max(b[3] for b in boxes)
    span_x = max(xmax - xmin, 1e-300)
    span_y = max(ymax - ymin, 1e-300)
    pad = 0.02 * max(span_x, span_y)
    xmin, xmax = xmin - pad, xmax + pad
    ymin, ymax = ymin - pad, ymax + pad

    map_w = width - _LEGEND_W - 2 * _PAD
    scale = map_w / (xmax - xmin)
    top = _PAD + (26 if title else 0)
    map_h = (ymax - ymin) * scale
    height = int(np.ceil(map_h + top + _PAD))

    def sx(x: float) -> str:
        return _fmt(_PAD + (x - xmin) * scale)

    def sy(y: float) -> str:
        return _fmt(top + (ymax - y) * scale)

    if mode == "categorical":
        cats = sorted(set(vals.tolist()), key=_label)
        color_of = {c: PALETTE[i % len(PALETTE)] for i, c in enumerate(cats)}
        fills = [color_of[v] for v in vals.tolist()]
    else:
        lo, hi = float(vals.min()), float(vals.max())
        if hi > lo:
            fills = [_ramp((float(v) - lo) / (hi - lo)) for v in vals]
        else:
            fills = [_ramp(0.5)] * len(vals)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_fmt(_PAD + map_w / 2)}" y="{_PAD + 12}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="16">'
            f"{escape(title)}</text>"
        )

    for i, geom in enumerate(geometries):
        d = []
        polys = geom.parts if isinstance(geom, MultiPolygon) else (geom,)
        for poly in polys:
            if not isinstance(poly, Polygon):
                raise ValidationError("geometries must be polygons")
            for ring in (poly.shell, *poly.holes):
                pts = " L ".join(f"{sx(px)} {sy(py)}" for px, py in ring)
                d.append(f"M {pts} Z")
        tip = ""
        if unit_ids is not None:
            tip = f"<title>{escape(unit_ids[i])}: {escape(_label(values[i]))}</title>"
        parts.append(
            f'<path d="{" ".join(d)}" fill="{fills[i]}" fill-rule="evenodd" '
            f'stroke="#333333" stroke-width="0.5">{tip}</path>'
            if tip
            else f'<path d="{" ".join(d)}" fill="{fills[i]}" fill-rule="evenodd" '
            f'stroke="#333333" stroke-width="0.5"/>'
        )

    lx = width - _LEGEND_W + _PAD
    if mode == "categorical":
        parts.append(
            f'<text x="{lx}" y="{top + 10}" font-family="sans-serif" '
            f'font-size="13" font-weight="bold">legend</text>'
        )
        for i, c in enumerate(cats):
            yy = top + 24 + 20 * i
            parts.append(
                f'<rect x="{lx}" y="{yy}" width="14" height="14" '
                f'fill="{color_of[c]}" stroke="#333333" stroke-width="0.5"/>'
            )
            parts.append(
                f'<text x="{lx + 20}" y="{yy + 11}" font-family="sans-serif" '
                f'font-size="12">{escape(_label(c))}</text>'
            )
    else:
        bar_h = 160
        parts.append(
            '<defs><linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0">'
            f'<stop offset="0" stop-color="{_ramp(0.0)}"/>'
            f'<stop offset="0.5" stop-color="{_ramp(0.5)}"/>'
            f'<stop offset="1" stop-color="{_ramp(1.0)}"/>'
            "</linearGradient></defs>"
        )
        parts.append(
            f'<rect x="{lx}" y="{top + 10}" width="18" height="{bar_h}" '
            f'fill="url(#ramp)" stroke="#333333" stroke-width="0.5"/>'
        )
        lo, hi = float(vals.min()), float(vals.max())
        parts.append(
            f'<text x="{lx + 24}" y="{top + 20}" font-family="sans-serif" '
            f'font-size="12">{escape(_label(hi))}</text>'
        )
        parts.append(
            f'<text x="{lx + 24}" y="{top + 10 + bar_h}" font-family="sans-serif" '
            f'font-size="12">{escape(_label(lo))}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
