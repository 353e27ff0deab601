# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot geometric kernels (see ``_pykernels``)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, ceil, INFINITY

cnp.import_array()


cdef inline double _pt_seg2(double px, double py, double ax, double ay,
                            double bx, double by) noexcept nogil:
    cdef double dx = bx - ax, dy = by - ay
    cdef double wx = px - ax, wy = py - ay
    cdef double dd = dx * dx + dy * dy
    cdef double t = 0.0
    if dd > 0.0:
        t = (wx * dx + wy * dy) / dd
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    wx -= t * dx
    wy -= t * dy
    return wx * wx + wy * wy


def min_dist_to_segments(points, seg_a, seg_b):
    cdef const double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    cdef const double[:, ::1] a = np.ascontiguousarray(seg_a, dtype=np.float64).reshape(-1, 2)
    cdef const double[:, ::1] b = np.ascontiguousarray(seg_b, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t m = p.shape[0], k = a.shape[0], i, j
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double best, d2
    with nogil:
        for i in range(m):
            best = INFINITY
            for j in range(k):
                d2 = _pt_seg2(p[i, 0], p[i, 1], a[j, 0], a[j, 1], b[j, 0], b[j, 1])
                if d2 < best:
                    best = d2
            o[i] = sqrt(best)
    return out


def even_odd_contains(points, seg_a, seg_b):
    cdef const double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    cdef const double[:, ::1] a = np.ascontiguousarray(seg_a, dtype=np.float64).reshape(-1, 2)
    cdef const double[:, ::1] b = np.ascontiguousarray(seg_b, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t m = p.shape[0], k = a.shape[0], i, j
    out = np.zeros(m, dtype=bool)
    cdef cnp.npy_bool[::1] o = out
    cdef double px, py, ax, ay, bx, by
    cdef int inside
    with nogil:
        for i in range(m):
            px = p[i, 0]
            py = p[i, 1]
            inside = 0
            for j in range(k):
                ay = a[j, 1]
                by = b[j, 1]
                if (ay > py) != (by > py):
                    ax = a[j, 0]
                    bx = b[j, 0]
                    if px < ax + (py - ay) * (bx - ax) / (by - ay):
                        inside ^= 1
            o[i] = inside
    return out


def scanline_fill(seg_a, seg_b, double x0, double y0, double pixel_size,
                  Py_ssize_t width, Py_ssize_t height):
    cdef const double[:, ::1] a = np.ascontiguousarray(seg_a, dtype=np.float64).reshape(-1, 2)
    cdef const double[:, ::1] b = np.ascontiguousarray(seg_b, dtype=np.float64).reshape(-1, 2)
    out = np.zeros((max(height, 0), max(width, 0)), dtype=bool)
    if width <= 0 or height <= 0:
        return out
    toggles_arr = np.zeros((height, width + 1), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] tg = toggles_arr
    cdef cnp.npy_bool[:, ::1] o = out
    cdef Py_ssize_t k = a.shape[0], j, r, c, r0, r1
    cdef double ya, yb, xa, xb, lo, hi, xc
    cdef cnp.uint8_t acc
    with nogil:
        for j in range(k):
            ya = (a[j, 1] - y0) / pixel_size - 0.5
            yb = (b[j, 1] - y0) / pixel_size - 0.5
            if ya == yb:
                continue
            xa = (a[j, 0] - x0) / pixel_size - 0.5
            xb = (b[j, 0] - x0) / pixel_size - 0.5
            lo = ya if ya < yb else yb
            hi = yb if ya < yb else ya
            r0 = <Py_ssize_t>ceil(lo) if lo > 0 else 0
            r1 = <Py_ssize_t>ceil(hi) if hi > 0 else 0
            if r0 > height:
                r0 = height
            if r1 > height:
                r1 = height
            for r in range(r0, r1):
                xc = xa + (r - ya) / (yb - ya) * (xb - xa)
                if xc <= 0:
                    c = 0
                else:
                    c = <Py_ssize_t>ceil(xc)
                    if c > width:
                        c = width
                tg[r, c] ^= 1
        for r in range(height):
            acc = 0
            for c in range(width):
                acc ^= tg[r, c]
                o[r, c] = acc
    return out


cdef inline double _orient(double ax, double ay, double bx, double by,
                           double cx, double cy) noexcept nogil:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def first_crossing(seg_a, seg_b, nxt, double eps):
    cdef const double[:, ::1] a = np.ascontiguousarray(seg_a, dtype=np.float64).reshape(-1, 2)
    cdef const double[:, ::1] b = np.ascontiguousarray(seg_b, dtype=np.float64).reshape(-1, 2)
    cdef const cnp.int64_t[::1] nx = np.ascontiguousarray(nxt, dtype=np.int64)
    cdef Py_ssize_t k = a.shape[0], i, j
    cdef double o1, o2, o3, o4, d2, e2 = eps * eps
    cdef double ilx, ihx, ily, ihy, jlx, jhx, jly, jhy
    cdef Py_ssize_t hi_i = -1, hi_j = -1
    if k < 4:
        return -1, -1
    with nogil:
        for i in range(k):
            ilx = a[i, 0] if a[i, 0] < b[i, 0] else b[i, 0]
            ihx = b[i, 0] if a[i, 0] < b[i, 0] else a[i, 0]
            ily = a[i, 1] if a[i, 1] < b[i, 1] else b[i, 1]
            ihy = b[i, 1] if a[i, 1] < b[i, 1] else a[i, 1]
            for j in range(i + 1, k):
                if nx[i] == j or nx[j] == i:
                    continue
                jlx = a[j, 0] if a[j, 0] < b[j, 0] else b[j, 0]
                jhx = b[j, 0] if a[j, 0] < b[j, 0] else a[j, 0]
                if jlx > ihx + eps or ilx > jhx + eps:
                    continue
                jly = a[j, 1] if a[j, 1] < b[j, 1] else b[j, 1]
                jhy = b[j, 1] if a[j, 1] < b[j, 1] else a[j, 1]
                if jly > ihy + eps or ily > jhy + eps:
                    continue
                o1 = _orient(a[i, 0], a[i, 1], b[i, 0], b[i, 1], a[j, 0], a[j, 1])
                o2 = _orient(a[i, 0], a[i, 1], b[i, 0], b[i, 1], b[j, 0], b[j, 1])
                o3 = _orient(a[j, 0], a[j, 1], b[j, 0], b[j, 1], a[i, 0], a[i, 1])
                o4 = _orient(a[j, 0], a[j, 1], b[j, 0], b[j, 1], b[i, 0], b[i, 1])
                if o1 * o2 < 0 and o3 * o4 < 0:
                    hi_i = i
                    hi_j = j
                    break
                d2 = _pt_seg2(a[j, 0], a[j, 1], a[i, 0], a[i, 1], b[i, 0], b[i, 1])
                d2 = min(d2, _pt_seg2(b[j, 0], b[j, 1], a[i, 0], a[i, 1], b[i, 0], b[i, 1]))
                d2 = min(d2, _pt_seg2(a[i, 0], a[i, 1], a[j, 0], a[j, 1], b[j, 0], b[j, 1]))
                d2 = min(d2, _pt_seg2(b[i, 0], b[i, 1], a[j, 0], a[j, 1], b[j, 0], b[j, 1]))
                if d2 <= e2:
                    hi_i = i
                    hi_j = j
                    break
            if hi_i >= 0:
                break
    return hi_i, hi_j
