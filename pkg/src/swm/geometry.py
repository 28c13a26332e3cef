"""2D geometry helpers: convex polygons, intersection areas, circle contacts.

All polygons are (V, 2) float arrays in counter-clockwise order. Block shapes
(tee, ell, plus) are unions of axis-aligned rectangles in a local frame and are
transformed (scale, rotate, translate) into world coordinates as convex parts
with disjoint interiors, so intersection areas add up part-by-part.
"""

from __future__ import annotations

import math

import numpy as np

# Unit-scale block shapes as rectangles (x0, y0, x1, y1) in the local frame.
# Parts have disjoint interiors; the frame origin is the pose reference point.
BLOCK_SHAPES = {
    "tee": (
        (-0.10, 0.05, 0.10, 0.11),
        (-0.03, -0.11, 0.03, 0.05),
    ),
    "ell": (
        (-0.10, -0.11, 0.10, -0.05),
        (-0.10, -0.05, -0.04, 0.11),
    ),
    "plus": (
        (-0.11, -0.03, 0.11, 0.03),
        (-0.03, 0.03, 0.03, 0.11),
        (-0.03, -0.11, 0.03, -0.03),
    ),
}


def rect_verts(x0, y0, x1, y1):
    """Counter-clockwise vertices of an axis-aligned rectangle."""
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)


def poly_area(verts):
    """Signed shoelace area (positive for counter-clockwise order)."""
    x = verts[:, 0]
    y = verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def ensure_ccw(verts):
    return verts if poly_area(verts) >= 0.0 else verts[::-1].copy()


def transform_verts(verts, scale, angle, pos):
    """Scale, rotate, then translate local-frame vertices into the world."""
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return (verts * scale) @ rot.T + np.asarray(pos, dtype=float)


def block_parts(shape, scale, angle, pos):
    """World-frame convex parts (list of (4, 2) CCW arrays) of a block shape."""
    parts = []
    for x0, y0, x1, y1 in BLOCK_SHAPES[shape]:
        parts.append(ensure_ccw(transform_verts(rect_verts(x0, y0, x1, y1), scale, angle, pos)))
    return parts


def shape_area(shape, scale=1.0):
    total = 0.0
    for x0, y0, x1, y1 in BLOCK_SHAPES[shape]:
        total += (x1 - x0) * (y1 - y0)
    return total * scale * scale


def shape_circumradius(shape, scale=1.0):
    """Max vertex distance from the frame origin."""
    r = 0.0
    for x0, y0, x1, y1 in BLOCK_SHAPES[shape]:
        for x in (x0, x1):
            for y in (y0, y1):
                r = max(r, math.hypot(x, y))
    return r * scale


def clip_convex(subject, clip):
    """Sutherland-Hodgman: clip CCW `subject` polygon by CCW convex `clip`.

    Returns the vertices of the intersection (possibly empty).
    """
    out = [tuple(p) for p in subject]
    n = len(clip)
    for i in range(n):
        if not out:
            break
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        inp = out
        out = []
        prev = inp[-1]
        prev_side = ex * (prev[1] - ay) - ey * (prev[0] - ax)
        for cur in inp:
            cur_side = ex * (cur[1] - ay) - ey * (cur[0] - ax)
            if cur_side >= 0.0:
                if prev_side < 0.0:
                    t = prev_side / (prev_side - cur_side)
                    out.append((prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])))
                out.append(cur)
            elif prev_side >= 0.0:
                t = prev_side / (prev_side - cur_side)
                out.append((prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])))
            prev, prev_side = cur, cur_side
    return np.array(out, dtype=float) if out else np.empty((0, 2))


def convex_intersection_area(a, b):
    inter = clip_convex(a, b)
    if len(inter) < 3:
        return 0.0
    return abs(poly_area(inter))


def parts_intersection_area(parts_a, parts_b):
    """Intersection area of two part unions (parts must tile each union)."""
    total = 0.0
    for pa in parts_a:
        for pb in parts_b:
            total += convex_intersection_area(pa, pb)
    return total


def point_in_convex(px, py, verts):
    """True if the point is inside or on the boundary of a CCW convex polygon."""
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        if (bx - ax) * (py - ay) - (by - ay) * (px - ax) < 0.0:
            return False
    return True


def _closest_on_segment(px, py, ax, ay, bx, by):
    vx, vy = bx - ax, by - ay
    denom = vx * vx + vy * vy
    if denom <= 0.0:
        return ax, ay
    t = ((px - ax) * vx + (py - ay) * vy) / denom
    t = min(1.0, max(0.0, t))
    return ax + t * vx, ay + t * vy


def closest_point_on_convex(px, py, verts):
    """Closest boundary point of a convex polygon to (px, py)."""
    best = None
    best_d2 = math.inf
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        qx, qy = _closest_on_segment(px, py, ax, ay, bx, by)
        d2 = (px - qx) ** 2 + (py - qy) ** 2
        if d2 < best_d2:
            best_d2 = d2
            best = (qx, qy)
    return best[0], best[1], math.sqrt(best_d2)


def _edge_outward_normal(verts, i):
    # CCW polygon: outward normal of edge i points right of the edge direction.
    ax, ay = verts[i]
    bx, by = verts[(i + 1) % len(verts)]
    ex, ey = bx - ax, by - ay
    norm = math.hypot(ex, ey)
    if norm == 0.0:
        return 0.0, 0.0
    return ey / norm, -ex / norm


def circle_convex_contact(cx, cy, r, verts):
    """Contact of a circle with a convex polygon.

    Returns (depth, ux, uy, qx, qy) where depth > 0 is the penetration,
    (ux, uy) the outward unit normal at the contact and (qx, qy) the contact
    point on the polygon boundary, or None when there is no overlap.
    """
    qx, qy, dist = closest_point_on_convex(cx, cy, verts)
    if point_in_convex(cx, cy, verts):
        depth = r + dist
        if dist > 1e-12:
            ux, uy = (qx - cx) / dist, (qy - cy) / dist
        else:
            # Center sits on the boundary: use the nearest edge normal.
            best_i, best_d = 0, math.inf
            for i in range(len(verts)):
                ax, ay = verts[i]
                bx, by = verts[(i + 1) % len(verts)]
                sx, sy = _closest_on_segment(cx, cy, ax, ay, bx, by)
                d = math.hypot(cx - sx, cy - sy)
                if d < best_d:
                    best_d, best_i = d, i
            ux, uy = _edge_outward_normal(verts, best_i)
        return depth, ux, uy, qx, qy
    if dist >= r:
        return None
    if dist > 1e-12:
        ux, uy = (cx - qx) / dist, (cy - qy) / dist
    else:
        ux, uy = 0.0, 1.0
    return r - dist, ux, uy, qx, qy


def deepest_contact(cx, cy, r, parts):
    """Deepest circle contact over a list of convex parts, or None."""
    best = None
    for part in parts:
        hit = circle_convex_contact(cx, cy, r, part)
        if hit is not None and (best is None or hit[0] > best[0]):
            best = hit
    return best
