"""Small planar geometry kit: monotone-chain hulls, point/polygon distances,
Hausdorff distance between convex polygons."""

from __future__ import annotations

import numpy as np

DEDUP_TOL = 1e-9


def convex_hull(points) -> np.ndarray:
    """Counterclockwise convex hull (Andrew's monotone chain).

    Input points are deduplicated at 1e-9; collinear boundary points are
    dropped.  Degenerate inputs return 1 or 2 vertices.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected an (N, 2) point array")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    keep = [0]
    for i in range(1, len(pts)):
        if np.max(np.abs(pts[i] - pts[keep[-1]])) > DEDUP_TOL:
            keep.append(i)
    pts = pts[keep]
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= DEDUP_TOL**2:
            lower.pop()
        lower.append(p)
    upper = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= DEDUP_TOL**2:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    return hull


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _segment_distance(p, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = np.clip((p - a) @ ab / denom, 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def point_in_polygon(p, vertices) -> bool:
    """Point inside (or on) a convex CCW polygon."""
    v = np.asarray(vertices, dtype=float)
    p = np.asarray(p, dtype=float)
    if len(v) == 1:
        return bool(np.linalg.norm(p - v[0]) <= DEDUP_TOL)
    if len(v) == 2:
        return _segment_distance(p, v[0], v[1]) <= DEDUP_TOL
    for i in range(len(v)):
        a, b = v[i], v[(i + 1) % len(v)]
        cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if cross < -DEDUP_TOL:
            return False
    return True


def point_to_polygon_distance(p, vertices) -> float:
    """Distance from a point to a convex polygon (0 inside)."""
    v = np.asarray(vertices, dtype=float)
    p = np.asarray(p, dtype=float)
    if len(v) >= 3 and point_in_polygon(p, v):
        return 0.0
    if len(v) == 1:
        return float(np.linalg.norm(p - v[0]))
    return min(
        _segment_distance(p, v[i], v[(i + 1) % len(v)]) for i in range(len(v))
    )


def interior_margin(p, vertices) -> float:
    """Distance from an interior point to the boundary; negative outside."""
    v = np.asarray(vertices, dtype=float)
    p = np.asarray(p, dtype=float)
    if len(v) < 3:
        return -point_to_polygon_distance(p, v)
    margins = []
    for i in range(len(v)):
        a, b = v[i], v[(i + 1) % len(v)]
        edge = b - a
        ln = np.linalg.norm(edge)
        if ln < DEDUP_TOL:
            continue
        # inward normal of a CCW edge
        margins.append(((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / ln)
    return float(min(margins))


def hausdorff_convex(A, B) -> float:
    """Hausdorff distance between convex polygons given by vertex arrays.

    For convex sets the supremum is attained at vertices, so checking
    vertex-to-polygon distances both ways is exact.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    d1 = max(point_to_polygon_distance(a, B) for a in A)
    d2 = max(point_to_polygon_distance(b, A) for b in B)
    return max(d1, d2)
