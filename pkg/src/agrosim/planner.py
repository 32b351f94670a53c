"""Boustrophedon coverage planning and coverage auditing.

A field polygon is swept with parallel lines one implement width apart,
each in-polygon portion becomes a swath, and the swaths are linked into a
serpentine waypoint route with a greedy nearest-endpoint rule. A
rasterizing auditor scores how much of the field a driven path covered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from shapely.geometry import LineString, MultiLineString, Polygon

from .controllers import lookahead_target

__all__ = [
    "DegeneratePolygon", "FieldPolygon", "CoveragePlan", "plan_coverage",
    "lookahead_point", "coverage_ratio", "CoverageGrid",
]

Point2 = tuple[float, float]


class DegeneratePolygon(ValueError):
    """Polygon is unusable: too few vertices, self-intersecting, or zero area."""


def _rotate(points, angle: float) -> list[Point2]:
    c, s = math.cos(angle), math.sin(angle)
    return [(c * x - s * y, s * x + c * y) for x, y in points]


@dataclass(frozen=True)
class FieldPolygon:
    """Simple polygon in meters, stored counterclockwise."""

    vertices: tuple[Point2, ...]

    @classmethod
    def from_vertices(cls, vertices) -> "FieldPolygon":
        pts = [(float(x), float(y)) for x, y in vertices]
        # A closing vertex equal to the first is tolerated and dropped.
        if len(pts) > 1 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) < 3:
            raise DegeneratePolygon(f"need at least 3 vertices, got {len(pts)}")
        if not all(math.isfinite(v) for p in pts for v in p):
            raise DegeneratePolygon("non-finite vertex coordinate")
        poly = Polygon(pts)
        if not poly.is_valid or poly.area <= 0:
            raise DegeneratePolygon("polygon must be simple with positive area")
        if not poly.exterior.is_ccw:
            pts.reverse()
        return cls(vertices=tuple(pts))

    def shapely(self) -> Polygon:
        return Polygon(self.vertices)

    @property
    def area(self) -> float:
        return self.shapely().area

    def to_dict(self) -> dict:
        return {"vertices": [[x, y] for x, y in self.vertices]}


@dataclass(frozen=True)
class CoveragePlan:
    """Swaths in traversal order plus the linked waypoint route."""

    swaths: tuple[tuple[Point2, Point2], ...]
    waypoints: tuple[Point2, ...]
    implement_width: float
    direction: float

    @property
    def route_length(self) -> float:
        pts = self.waypoints
        return math.fsum(math.hypot(b[0] - a[0], b[1] - a[1])
                         for a, b in zip(pts, pts[1:]))

    def to_dict(self) -> dict:
        return {
            "swaths": [[[a[0], a[1]], [b[0], b[1]]] for a, b in self.swaths],
            "waypoints": [[x, y] for x, y in self.waypoints],
            "implement_width": self.implement_width,
            "direction": self.direction,
            "route_length": self.route_length,
        }


def _sweep_segments(poly: Polygon, y: float) -> list[tuple[Point2, Point2]]:
    """In-polygon portions of the horizontal line at height y, left to right."""
    x_min, _, x_max, _ = poly.bounds
    pad = (x_max - x_min) + 1.0
    line = LineString([(x_min - pad, y), (x_max + pad, y)])
    hit = poly.intersection(line)
    if hit.is_empty:
        return []
    if isinstance(hit, LineString):
        parts = [hit]
    elif isinstance(hit, MultiLineString):
        parts = list(hit.geoms)
    else:
        # Collections mix segments with grazing points; keep the segments.
        parts = [g for g in getattr(hit, "geoms", []) if isinstance(g, LineString)]
    segments = []
    for part in parts:
        if part.length <= 1e-9:
            continue
        coords = list(part.coords)
        a, b = coords[0], coords[-1]
        if a[0] > b[0]:
            a, b = b, a
        segments.append(((a[0], y), (b[0], y)))
    segments.sort(key=lambda s: s[0][0])
    return segments


def plan_coverage(poly: FieldPolygon, width: float, direction: float,
                  *, start_hint: Point2 | None = None) -> CoveragePlan:
    """Plan a serpentine coverage route over the polygon.

    Sweep lines run along ``direction`` at ``width`` spacing, the stack
    centered across the polygon's extent; a polygon narrower than one width
    gets a single centered swath. ``start_hint`` picks the swath endpoint
    nearest to it as the route start (used when replanning from the
    vehicle's current pose).
    """
    if width <= 0:
        raise ValueError("width must be > 0")
    work = Polygon(_rotate(poly.vertices, -direction))
    _, y_min, _, y_max = work.bounds
    height = y_max - y_min
    n_lines = max(1, math.ceil(height / width - 1e-9))
    # Center the line stack: splitting the slack between the two edges keeps
    # the outermost passes strictly inside the polygon while the implement
    # still reaches both edges.
    first = y_min + (height - (n_lines - 1) * width) / 2.0
    levels = [first + k * width for k in range(n_lines)]
    swaths = []  # (level index, left point, right point), rotated frame
    for idx, y in enumerate(levels):
        for a, b in _sweep_segments(work, y):
            swaths.append((idx, a, b))
    if not swaths:
        raise DegeneratePolygon("no sweep line intersects the polygon")

    if start_hint is not None:
        hint = _rotate([start_hint], -direction)[0]
    else:
        # Deterministic default: bottom-left-most endpoint.
        hint = min((p for _, a, b in swaths for p in (a, b)),
                   key=lambda p: (p[1], p[0]))

    def dist(p: Point2, q: Point2) -> float:
        return math.hypot(p[0] - q[0], p[1] - q[1])

    ordered: list[tuple[Point2, Point2]] = []
    remaining = list(range(len(swaths)))
    cursor = hint
    while remaining:
        best = None
        for i in remaining:
            idx, a, b = swaths[i]
            for entry, exit_ in ((a, b), (b, a)):
                key = (dist(cursor, entry), idx, entry[0], entry[1])
                if best is None or key < best[0]:
                    best = (key, i, entry, exit_)
        _, i, entry, exit_ = best
        remaining.remove(i)
        ordered.append((entry, exit_))
        cursor = exit_

    back = [(_rotate([a], direction)[0], _rotate([b], direction)[0])
            for a, b in ordered]
    waypoints: list[Point2] = []
    for a, b in back:
        waypoints.extend((a, b))
    return CoveragePlan(swaths=tuple(back), waypoints=tuple(waypoints),
                        implement_width=width, direction=direction)


def lookahead_point(route, progress: float, lookahead: float) -> Point2:
    """Point at arc length progress + lookahead along the route, clamped."""
    return lookahead_target(list(route), progress, lookahead)


class CoverageGrid:
    """Rasterized coverage tally over a polygon's interior cells.

    Cell size is tied to the implement width so the audit error stays near
    one percent. ``margin`` erodes the counted interior, excluding the edge
    band that a centerline route cannot reach.
    """

    def __init__(self, poly: FieldPolygon, width: float, *, margin: float = 0.0):
        import shapely

        if width <= 0:
            raise ValueError("width must be > 0")
        self.cell = min(width / 10.0, 0.1)
        self.radius = width / 2.0
        geom = poly.shapely()
        counted = geom.buffer(-margin) if margin > 0 else geom
        x_min, y_min, x_max, y_max = geom.bounds
        xs = np.arange(x_min + self.cell / 2, x_max, self.cell)
        ys = np.arange(y_min + self.cell / 2, y_max, self.cell)
        gx, gy = np.meshgrid(xs, ys)
        gx, gy = gx.ravel(), gy.ravel()
        inside = shapely.contains_xy(counted, gx, gy)
        self.cx = gx[inside]
        self.cy = gy[inside]
        self.covered = np.zeros(self.cx.shape, dtype=bool)
        self._last: Point2 | None = None

    def stamp_segment(self, a: Point2, b: Point2) -> None:
        """Mark cells within the implement half-width of segment a-b."""
        if not self.cx.size:
            return
        ax, ay = a
        dx, dy = b[0] - ax, b[1] - ay
        seg2 = dx * dx + dy * dy
        px = self.cx - ax
        py = self.cy - ay
        if seg2 == 0.0:
            d2 = px * px + py * py
        else:
            t = np.clip((px * dx + py * dy) / seg2, 0.0, 1.0)
            ex = px - t * dx
            ey = py - t * dy
            d2 = ex * ex + ey * ey
        self.covered |= d2 <= self.radius * self.radius
        self._last = b

    def stamp_point(self, p: Point2) -> None:
        """Extend the driven path to p, marking the newly swept cells."""
        if self._last is None:
            self.stamp_segment(p, p)
        else:
            self.stamp_segment(self._last, p)
        self._last = p

    def ratio(self) -> float:
        if not self.cx.size:
            return 0.0
        return float(np.count_nonzero(self.covered)) / float(self.cx.size)


def coverage_ratio(path, poly: FieldPolygon, width: float,
                   *, margin: float = 0.0) -> float:
    """Fraction of interior cells within width/2 of the driven path.

    ``path`` is a sequence of (x, y) positions. Near-duplicate points are
    skipped; that moves the swept boundary by far less than one cell.
    """
    pts = [(float(x), float(y)) for x, y in path]
    if not pts:
        return 0.0
    grid = CoverageGrid(poly, width, margin=margin)
    keep = grid.cell / 4.0
    grid.stamp_point(pts[0])
    last = pts[0]
    for p in pts[1:-1]:
        if math.hypot(p[0] - last[0], p[1] - last[1]) >= keep:
            grid.stamp_point(p)
            last = p
    if len(pts) > 1:
        grid.stamp_point(pts[-1])
    return grid.ratio()
