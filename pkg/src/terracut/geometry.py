"""Planar polygon primitives: areas, centroids, boundary distances, GeoJSON.

Coordinates are assumed to live in a projected CRS with metric units, so
Euclidean geometry applies throughout. Rings are stored unclosed (the first
vertex is not repeated at the end).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometry, ParseError


@dataclass(frozen=True)
class Polygon:
    """Single polygon: one outer shell plus zero or more holes."""

    shell: np.ndarray
    holes: tuple[np.ndarray, ...] = ()


@dataclass(frozen=True)
class MultiPolygon:
    parts: tuple[Polygon, ...] = field(default_factory=tuple)


Geometry = Polygon | MultiPolygon


def as_ring(coords) -> np.ndarray:
    """Normalize a coordinate sequence to an unclosed float ring.

    Accepts closed or unclosed input; requires at least 3 distinct vertices.
    """
    ring = np.asarray(coords, dtype=float)
    if ring.ndim != 2 or ring.shape[1] != 2:
        raise DegenerateGeometry("ring must be a sequence of (x, y) pairs")
    if not np.all(np.isfinite(ring)):
        raise DegenerateGeometry("ring has non-finite coordinates")
    if len(ring) >= 2 and np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    if len(np.unique(ring, axis=0)) < 3:
        raise DegenerateGeometry("ring needs at least 3 distinct vertices")
    return ring


def ring_area(ring: np.ndarray) -> float:
    """Signed shoelace area of an unclosed ring (positive if counterclockwise)."""
    x, y = ring[:, 0], ring[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def ring_centroid(ring: np.ndarray) -> tuple[float, float, float]:
    """Centroid and signed area of one ring via the shoelace formula."""
    x, y = ring[:, 0], ring[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * float(np.sum(cross))
    if area == 0.0:
        return float(np.mean(x)), float(np.mean(y)), 0.0
    cx = float(np.sum((x + xn) * cross)) / (6.0 * area)
    cy = float(np.sum((y + yn) * cross)) / (6.0 * area)
    return cx, cy, area


def polygon_centroid(geom: Geometry) -> np.ndarray:
    """Area-weighted centroid of a polygon or multipolygon.

    Holes subtract from their shell regardless of ring orientation. Raises
    DegenerateGeometry when the net area is zero.
    """
    total_area = 0.0
    moment = np.zeros(2)
    for part in _parts(geom):
        cx, cy, a = ring_centroid(part.shell)
        a = abs(a)
        total_area += a
        moment += a * np.array([cx, cy])
        for hole in part.holes:
            hx, hy, ha = ring_centroid(hole)
            ha = abs(ha)
            total_area -= ha
            moment -= ha * np.array([hx, hy])
    if total_area <= 0.0:
        raise DegenerateGeometry("zero-area geometry has no centroid")
    return moment / total_area


def geometry_area(geom: Geometry) -> float:
    total = 0.0
    for part in _parts(geom):
        total += abs(ring_area(part.shell))
        for hole in part.holes:
            total -= abs(ring_area(hole))
    return total


def geometry_bounds(geom: Geometry) -> tuple[float, float, float, float]:
    """(xmin, ymin, xmax, ymax) over all rings, holes included."""
    rings = [r for p in _parts(geom) for r in (p.shell, *p.holes)]
    pts = np.vstack(rings)
    return (
        float(pts[:, 0].min()),
        float(pts[:, 1].min()),
        float(pts[:, 0].max()),
        float(pts[:, 1].max()),
    )


def boundary_segments(geom: Geometry) -> np.ndarray:
    """All boundary segments as an (m, 2, 2) array; hole rings count as boundary."""
    segs = []
    for part in _parts(geom):
        for ring in (part.shell, *part.holes):
            closed = np.vstack([ring, ring[:1]])
            segs.append(np.stack([closed[:-1], closed[1:]], axis=1))
    return np.concatenate(segs, axis=0)


def _parts(geom: Geometry) -> tuple[Polygon, ...]:
    if isinstance(geom, Polygon):
        return (geom,)
    if isinstance(geom, MultiPolygon):
        if not geom.parts:
            raise DegenerateGeometry("empty multipolygon")
        return geom.parts
    raise DegenerateGeometry(f"unsupported geometry type {type(geom).__name__}")


def point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.hypot(*(p - a)))
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.hypot(*(p - (a + t * ab))))


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a, b, c) -> bool:
    # collinear c assumed; check c within bounding box of ab
    return (
        min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
    )


def segments_intersect(a, b, c, d) -> bool:
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 \
            and o3 != 0 and o4 != 0:
        return True
    if o1 == 0 and _on_segment(a, b, c):
        return True
    if o2 == 0 and _on_segment(a, b, d):
        return True
    if o3 == 0 and _on_segment(c, d, a):
        return True
    if o4 == 0 and _on_segment(c, d, b):
        return True
    return False


def segment_segment_distance(a, b, c, d) -> float:
    if segments_intersect(a, b, c, d):
        return 0.0
    return min(
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
    )


def min_boundary_distance(segs_a: np.ndarray, segs_b: np.ndarray, stop_at: float = 0.0) -> float:
    """Minimum distance between two boundary segment sets.

    Early-exits once a pair at or below ``stop_at`` is found.
    """
    best = np.inf
    for a, b in segs_a:
        for c, d in segs_b:
            dist = segment_segment_distance(a, b, c, d)
            if dist < best:
                best = dist
                if best <= stop_at:
                    return best
    return best


# --- GeoJSON mapping -------------------------------------------------------

def geometry_from_geojson(obj: dict) -> Geometry:
    """Decode a GeoJSON geometry dict into Polygon or MultiPolygon."""
    try:
        gtype = obj["type"]
        coords = obj["coordinates"]
    except (TypeError, KeyError) as exc:
        raise ParseError(f"geometry object missing {exc}") from exc
    try:
        if gtype == "Polygon":
            return _polygon_from_rings(coords)
        if gtype == "MultiPolygon":
            return MultiPolygon(tuple(_polygon_from_rings(c) for c in coords))
    except DegenerateGeometry as exc:
        raise ParseError(f"invalid {gtype}: {exc}") from exc
    raise ParseError(f"unsupported geometry type {gtype!r}")


def _polygon_from_rings(rings) -> Polygon:
    if not rings:
        raise DegenerateGeometry("polygon has no rings")
    return Polygon(as_ring(rings[0]), tuple(as_ring(r) for r in rings[1:]))


def geometry_to_geojson(geom: Geometry) -> dict:
    if isinstance(geom, Polygon):
        return {"type": "Polygon", "coordinates": _rings_to_lists(geom)}
    return {
        "type": "MultiPolygon",
        "coordinates": [_rings_to_lists(p) for p in _parts(geom)],
    }


def _rings_to_lists(poly: Polygon) -> list:
    out = []
    for ring in (poly.shell, *poly.holes):
        closed = np.vstack([ring, ring[:1]])
        out.append([[float(x), float(y)] for x, y in closed])
    return out
