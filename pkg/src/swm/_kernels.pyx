# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of `_kernels_py`.

Bit-for-bit identical to the numpy reference: the raster loops evaluate the
same f64 expressions in the same order (build flags disable FMA contraction),
and the rollout runs the same f32 operations. Bounding boxes only skip pixels
that provably fail the inside test: they are padded by two pixel widths, far
beyond any rounding slack, so skipped pixels can never differ from the
reference.
"""

from libc.math cimport sqrtf, floor, ceil


cdef inline long _imax(long a, long b) nogil:
    return a if a > b else b


cdef inline long _imin(long a, long b) nogil:
    return a if a < b else b


cdef inline long _col_lo(double x, long w) nogil:
    return _imax(0, <long>floor(x * w - 0.5))


cdef inline long _col_hi(double x, long w) nogil:
    return _imin(w - 1, <long>ceil(x * w - 0.5))


cdef inline long _row_lo(double y_hi, long h) nogil:
    # larger world y means smaller row index
    return _imax(0, <long>floor((1.0 - y_hi) * h - 0.5))


cdef inline long _row_hi(double y_lo, long h) nogil:
    return _imin(h - 1, <long>ceil((1.0 - y_lo) * h - 0.5))


def fill_rect(unsigned char[:, :, ::1] img, double x0, double y0, double x1, double y1,
              int r, int g, int b):
    cdef long h = img.shape[0]
    cdef long w = img.shape[1]
    cdef double padx = 2.0 / w
    cdef double pady = 2.0 / h
    cdef long c0 = _col_lo(x0 - padx, w), c1 = _col_hi(x1 + padx, w)
    cdef long r0 = _row_lo(y1 + pady, h), r1 = _row_hi(y0 - pady, h)
    cdef long row, col
    cdef double px, py
    cdef unsigned char cr = <unsigned char>r, cg = <unsigned char>g, cb = <unsigned char>b
    for row in range(r0, r1 + 1):
        py = 1.0 - (row + 0.5) / h
        if not (py >= y0 and py <= y1):
            continue
        for col in range(c0, c1 + 1):
            px = (col + 0.5) / w
            if px >= x0 and px <= x1:
                img[row, col, 0] = cr
                img[row, col, 1] = cg
                img[row, col, 2] = cb


def fill_circle(unsigned char[:, :, ::1] img, double cx, double cy, double rad,
                int r, int g, int b):
    cdef long h = img.shape[0]
    cdef long w = img.shape[1]
    cdef double padx = 2.0 / w
    cdef double pady = 2.0 / h
    cdef long c0 = _col_lo(cx - rad - padx, w), c1 = _col_hi(cx + rad + padx, w)
    cdef long r0 = _row_lo(cy + rad + pady, h), r1 = _row_hi(cy - rad - pady, h)
    cdef long row, col
    cdef double px, py, dx, dy, dy2
    cdef double rr = rad * rad
    cdef unsigned char cr = <unsigned char>r, cg = <unsigned char>g, cb = <unsigned char>b
    for row in range(r0, r1 + 1):
        py = 1.0 - (row + 0.5) / h
        dy = py - cy
        dy2 = dy * dy
        for col in range(c0, c1 + 1):
            px = (col + 0.5) / w
            dx = px - cx
            if dy2 + dx * dx <= rr:
                img[row, col, 0] = cr
                img[row, col, 1] = cg
                img[row, col, 2] = cb


def fill_convex_poly(unsigned char[:, :, ::1] img, double[:, ::1] verts,
                     int r, int g, int b):
    cdef long h = img.shape[0]
    cdef long w = img.shape[1]
    cdef long k = verts.shape[0]
    cdef long i, row, col
    cdef double minx = verts[0, 0], maxx = verts[0, 0]
    cdef double miny = verts[0, 1], maxy = verts[0, 1]
    for i in range(1, k):
        if verts[i, 0] < minx: minx = verts[i, 0]
        if verts[i, 0] > maxx: maxx = verts[i, 0]
        if verts[i, 1] < miny: miny = verts[i, 1]
        if verts[i, 1] > maxy: maxy = verts[i, 1]
    cdef double padx = 2.0 / w
    cdef double pady = 2.0 / h
    cdef long c0 = _col_lo(minx - padx, w), c1 = _col_hi(maxx + padx, w)
    cdef long r0 = _row_lo(maxy + pady, h), r1 = _row_hi(miny - pady, h)
    cdef double px, py, x0, y0, x1, y1, ex, ey
    cdef bint inside
    cdef unsigned char cr = <unsigned char>r, cg = <unsigned char>g, cb = <unsigned char>b
    for row in range(r0, r1 + 1):
        py = 1.0 - (row + 0.5) / h
        for col in range(c0, c1 + 1):
            px = (col + 0.5) / w
            inside = True
            for i in range(k):
                x0 = verts[i, 0]
                y0 = verts[i, 1]
                x1 = verts[(i + 1) % k, 0]
                y1 = verts[(i + 1) % k, 1]
                ex = x1 - x0
                ey = y1 - y0
                if ex * (py - y0) - ey * (px - x0) < 0.0:
                    inside = False
                    break
            if inside:
                img[row, col, 0] = cr
                img[row, col, 1] = cg
                img[row, col, 2] = cb


def tworoom_rollout(float[::1] p0, float[:, :, ::1] actions, float amax, float speed,
                    float lo, float hi, float[:, ::1] rects, float[:, :, ::1] out):
    cdef long kn = actions.shape[0]
    cdef long t_len = actions.shape[1]
    cdef long nr = rects.shape[0]
    cdef long k, t, ri
    cdef float px, py, ax, ay, n, s, nx, ny
    cdef bint blocked
    for k in range(kn):
        px = p0[0]
        py = p0[1]
        for t in range(t_len):
            ax = actions[k, t, 0]
            if ax < -amax: ax = -amax
            if ax > amax: ax = amax
            ay = actions[k, t, 1]
            if ay < -amax: ay = -amax
            if ay > amax: ay = amax
            n = sqrtf(ax * ax + ay * ay)
            if n > speed:
                s = speed / n
                ax = ax * s
                ay = ay * s
            nx = px + ax
            if nx < lo: nx = lo
            if nx > hi: nx = hi
            blocked = False
            for ri in range(nr):
                if nx > rects[ri, 0] and nx < rects[ri, 2] and py > rects[ri, 1] and py < rects[ri, 3]:
                    blocked = True
                    break
            if blocked:
                nx = px
            ny = py + ay
            if ny < lo: ny = lo
            if ny > hi: ny = hi
            blocked = False
            for ri in range(nr):
                if nx > rects[ri, 0] and nx < rects[ri, 2] and ny > rects[ri, 1] and ny < rects[ri, 3]:
                    blocked = True
                    break
            if blocked:
                ny = py
            px = nx
            py = ny
            out[k, t, 0] = px
            out[k, t, 1] = py
