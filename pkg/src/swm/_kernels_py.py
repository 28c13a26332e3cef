"""Reference kernels in plain numpy.

These are the canonical semantics for rasterization and batched TwoRoom
dynamics. The compiled twin in `_kernels.pyx` must match them bit for bit:
same expression order, same precisions (f64 raster coordinates, f32 dynamics),
no fused multiply-add. Tests diff both backends exhaustively.
"""

from __future__ import annotations

import numpy as np

_GRID_CACHE: dict = {}


def _axes(h: int, w: int):
    # pixel centers in world units; row 0 is the top of the image
    key = (h, w)
    if key not in _GRID_CACHE:
        xs = (np.arange(w, dtype=np.float64) + 0.5) / w
        ys = 1.0 - (np.arange(h, dtype=np.float64) + 0.5) / h
        _GRID_CACHE[key] = (xs, ys)
    return _GRID_CACHE[key]


def fill_rect(img, x0, y0, x1, y1, r, g, b):
    h, w = img.shape[0], img.shape[1]
    xs, ys = _axes(h, w)
    mx = (xs >= x0) & (xs <= x1)
    my = (ys >= y0) & (ys <= y1)
    img[my[:, None] & mx[None, :]] = (r, g, b)


def fill_circle(img, cx, cy, rad, r, g, b):
    h, w = img.shape[0], img.shape[1]
    xs, ys = _axes(h, w)
    dx = xs - cx
    dy = ys - cy
    mask = (dy * dy)[:, None] + (dx * dx)[None, :] <= rad * rad
    img[mask] = (r, g, b)


def fill_convex_poly(img, verts, r, g, b):
    # verts: (K, 2) float64, counter-clockwise
    h, w = img.shape[0], img.shape[1]
    xs, ys = _axes(h, w)
    k = verts.shape[0]
    mask = np.ones((h, w), dtype=bool)
    for i in range(k):
        x0 = float(verts[i, 0])
        y0 = float(verts[i, 1])
        x1 = float(verts[(i + 1) % k, 0])
        y1 = float(verts[(i + 1) % k, 1])
        ex = x1 - x0
        ey = y1 - y0
        t1 = ex * (ys - y0)
        t2 = ey * (xs - x0)
        mask &= t1[:, None] - t2[None, :] >= 0.0
    img[mask] = (r, g, b)


def tworoom_rollout(p0, actions, amax, speed, lo, hi, rects, out):
    """Roll K action sequences from one start through TwoRoom dynamics.

    p0 (2,) f32, actions (K, T, 2) f32, rects (R, 4) f32 rows (x0, y0, x1, y1),
    out (K, T, 2) f32 receives the position after each step. All math f32;
    per-component box clip, speed-norm clip, then axis-decomposed movement
    with a strict-interior wall test. Matches the env's step exactly.
    """
    amax = np.float32(amax)
    speed = np.float32(speed)
    lo = np.float32(lo)
    hi = np.float32(hi)
    kn, t_len, _ = actions.shape
    px = np.full(kn, p0[0], dtype=np.float32)
    py = np.full(kn, p0[1], dtype=np.float32)
    nrects = rects.shape[0]
    for t in range(t_len):
        ax = np.clip(actions[:, t, 0], -amax, amax)
        ay = np.clip(actions[:, t, 1], -amax, amax)
        n = np.sqrt(ax * ax + ay * ay)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = speed / n
        big = n > speed
        ax = np.where(big, ax * s, ax)
        ay = np.where(big, ay * s, ay)
        nx = np.clip(px + ax, lo, hi)
        blocked = np.zeros(kn, dtype=bool)
        for ri in range(nrects):
            blocked |= (
                (nx > rects[ri, 0]) & (nx < rects[ri, 2]) & (py > rects[ri, 1]) & (py < rects[ri, 3])
            )
        nx = np.where(blocked, px, nx)
        ny = np.clip(py + ay, lo, hi)
        blocked = np.zeros(kn, dtype=bool)
        for ri in range(nrects):
            blocked |= (
                (nx > rects[ri, 0]) & (nx < rects[ri, 2]) & (ny > rects[ri, 1]) & (ny < rects[ri, 3])
            )
        ny = np.where(blocked, py, ny)
        px = nx
        py = ny
        out[:, t, 0] = px
        out[:, t, 1] = py
