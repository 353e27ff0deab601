"""Numpy implementations of the hot geometric kernels.

These mirror ``_ckernels.pyx`` signature for signature and are used whenever
the compiled module is unavailable (or ``REACHSEG_PURE_PYTHON=1``).
"""

import numpy as np

# max elements of a temporary (points x segments) block
_BLOCK = 1 << 20


def min_dist_to_segments(points, seg_a, seg_b):
    """Distance from each point to the nearest of the segments ``seg_a[j]-seg_b[j]``."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    seg_a = np.asarray(seg_a, dtype=np.float64).reshape(-1, 2)
    seg_b = np.asarray(seg_b, dtype=np.float64).reshape(-1, 2)
    m, k = len(points), len(seg_a)
    out = np.full(m, np.inf)
    if m == 0 or k == 0:
        return out
    d = seg_b - seg_a
    dd = np.einsum("ij,ij->i", d, d)
    dd_safe = np.where(dd > 0.0, dd, 1.0)
    step = max(1, _BLOCK // k)
    for s in range(0, m, step):
        p = points[s:s + step]
        wx = p[:, 0, None] - seg_a[None, :, 0]
        wy = p[:, 1, None] - seg_a[None, :, 1]
        t = (wx * d[None, :, 0] + wy * d[None, :, 1]) / dd_safe[None, :]
        np.clip(t, 0.0, 1.0, out=t)
        t[:, dd == 0.0] = 0.0
        ex = wx - t * d[None, :, 0]
        ey = wy - t * d[None, :, 1]
        out[s:s + step] = np.sqrt((ex * ex + ey * ey).min(axis=1))
    return out


def even_odd_contains(points, seg_a, seg_b):
    """Crossing-number containment of points w.r.t. a closed edge soup (half-open rule)."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    seg_a = np.asarray(seg_a, dtype=np.float64).reshape(-1, 2)
    seg_b = np.asarray(seg_b, dtype=np.float64).reshape(-1, 2)
    m, k = len(points), len(seg_a)
    out = np.zeros(m, dtype=bool)
    if m == 0 or k == 0:
        return out
    ax, ay = seg_a[:, 0], seg_a[:, 1]
    bx, by = seg_b[:, 0], seg_b[:, 1]
    step = max(1, _BLOCK // k)
    for s in range(0, m, step):
        px = points[s:s + step, 0, None]
        py = points[s:s + step, 1, None]
        straddle = (ay[None, :] > py) != (by[None, :] > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = ax[None, :] + (py - ay[None, :]) * (bx - ax)[None, :] / (by - ay)[None, :]
        hits = straddle & (px < xc)
        out[s:s + step] = (hits.sum(axis=1) % 2) == 1
    return out


def scanline_fill(seg_a, seg_b, x0, y0, pixel_size, width, height):
    """Even-odd rasterization by pixel-center sampling.

    Pixel (r, c) has center ``(x0 + (c + .5) * h, y0 + (r + .5) * h)``.
    Returns a ``(height, width)`` bool array.
    """
    seg_a = np.asarray(seg_a, dtype=np.float64).reshape(-1, 2)
    seg_b = np.asarray(seg_b, dtype=np.float64).reshape(-1, 2)
    toggles = np.zeros((height, width + 1), dtype=np.int32)
    if len(seg_a) == 0 or width <= 0 or height <= 0:
        return np.zeros((height, width), dtype=bool)
    ya = (seg_a[:, 1] - y0) / pixel_size - 0.5
    yb = (seg_b[:, 1] - y0) / pixel_size - 0.5
    xa = (seg_a[:, 0] - x0) / pixel_size - 0.5
    xb = (seg_b[:, 0] - x0) / pixel_size - 0.5
    lo = np.minimum(ya, yb)
    hi = np.maximum(ya, yb)
    # rows r with lo <= r < hi (same half-open rule as even_odd_contains)
    r0 = np.clip(np.ceil(lo), 0, height).astype(np.int64)
    r1 = np.clip(np.ceil(hi), 0, height).astype(np.int64)
    counts = r1 - r0
    keep = counts > 0
    if not keep.any():
        return np.zeros((height, width), dtype=bool)
    idx = np.repeat(np.nonzero(keep)[0], counts[keep])
    offs = np.arange(len(idx)) - np.repeat(np.cumsum(counts[keep]) - counts[keep], counts[keep])
    rows = r0[idx] + offs
    t = (rows - ya[idx]) / (yb[idx] - ya[idx])
    xc = xa[idx] + t * (xb[idx] - xa[idx])
    cols = np.clip(np.ceil(xc), 0, width).astype(np.int64)
    np.add.at(toggles, (rows, cols), 1)
    return (np.cumsum(toggles[:, :width], axis=1) % 2).astype(bool)


def first_crossing(seg_a, seg_b, nxt, eps):
    """First pair of non-adjacent edges closer than ``eps``; ``(-1, -1)`` if none.

    ``nxt[i]`` is the index of the edge following edge ``i`` on its curve.
    """
    seg_a = np.asarray(seg_a, dtype=np.float64).reshape(-1, 2)
    seg_b = np.asarray(seg_b, dtype=np.float64).reshape(-1, 2)
    nxt = np.asarray(nxt, dtype=np.int64)
    k = len(seg_a)
    if k < 4:
        return -1, -1
    lo = np.minimum(seg_a, seg_b)
    hi = np.maximum(seg_a, seg_b)
    step = max(1, _BLOCK // k)
    jj = np.arange(k)
    for s in range(0, k, step):
        ii = np.arange(s, min(k, s + step))
        cand = jj[None, :] > ii[:, None]
        cand &= jj[None, :] != nxt[ii][:, None]
        cand &= nxt[jj][None, :] != ii[:, None]
        cand &= (lo[None, :, 0] <= hi[ii, None, 0] + eps) & (lo[ii, None, 0] <= hi[None, :, 0] + eps)
        cand &= (lo[None, :, 1] <= hi[ii, None, 1] + eps) & (lo[ii, None, 1] <= hi[None, :, 1] + eps)
        pi, pj = np.nonzero(cand)
        if len(pi) == 0:
            continue
        pi = ii[pi]
        hit = _segments_close(seg_a[pi], seg_b[pi], seg_a[pj], seg_b[pj], eps)
        if hit.any():
            w = np.argmax(hit)
            return int(pi[w]), int(pj[w])
    return -1, -1


def _orient(a, b, c):
    return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])


def _pt_seg(p, a, b):
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    t = np.einsum("ij,ij->i", p - a, d) / np.where(dd > 0, dd, 1.0)
    t = np.clip(np.where(dd > 0, t, 0.0), 0.0, 1.0)
    e = p - a - t[:, None] * d
    return np.sqrt(np.einsum("ij,ij->i", e, e))


def _segments_close(a, b, c, d, eps):
    o1 = _orient(a, b, c)
    o2 = _orient(a, b, d)
    o3 = _orient(c, d, a)
    o4 = _orient(c, d, b)
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    dist = np.minimum.reduce([_pt_seg(c, a, b), _pt_seg(d, a, b), _pt_seg(a, c, d), _pt_seg(b, c, d)])
    return proper | (dist <= eps)
