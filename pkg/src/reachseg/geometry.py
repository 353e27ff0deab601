"""Closed polygonal curves and regions bounded by them.

Curves are stored as ``(n, 2)`` float arrays, implicitly closed. Regions are
one counterclockwise outer curve plus clockwise holes. All functions here
are pure and never mutate their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import GeometryError

# relative slack (times bounding-box diagonal) used by the simplicity test
SIMPLICITY_SLACK = 1e-12
CORNER_ANGLE = 0.2


def _succ(a: np.ndarray) -> np.ndarray:
    """``a`` rotated so that row ``i`` holds ``a[i + 1]`` (cyclically)."""
    return np.concatenate((a[1:], a[:1]))


def _pred(a: np.ndarray) -> np.ndarray:
    return np.concatenate((a[-1:], a[:-1]))


class ClosedCurve:
    """Oriented simple polygon.

    Parameters
    ----------
    vertices : array_like, shape (n, 2)
        Vertex coordinates; the last vertex connects back to the first.
    validate : bool
        Run the O(n^2) simplicity test. Cheap checks (vertex count, duplicate
        consecutive vertices, non-zero area) always run.
    """

    __slots__ = ("_v", "_area")

    def __init__(self, vertices, validate: bool = True):
        v = np.array(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError(f"vertices must have shape (n, 2), got {v.shape}")
        if len(v) >= 2 and np.array_equal(v[0], v[-1]):
            v = v[:-1]
        if len(v) < 3:
            raise GeometryError(f"a closed curve needs at least 3 vertices, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise GeometryError("vertex coordinates must be finite")
        e = _succ(v) - v
        zero = np.flatnonzero((e == 0.0).all(axis=1))
        if len(zero):
            raise GeometryError(f"consecutive vertices {zero[0]} and {(zero[0] + 1) % len(v)} coincide")
        v.setflags(write=False)
        self._v = v
        self._area = _shoelace(v)
        if self._area == 0.0:
            raise GeometryError("curve encloses zero signed area")
        if validate:
            hit = _first_crossing([self])
            if hit is not None:
                raise GeometryError(f"curve is not simple: edges {hit[0]} and {hit[1]} intersect")

    @property
    def vertices(self) -> np.ndarray:
        return self._v

    def __len__(self):
        return len(self._v)

    def __repr__(self):
        return f"ClosedCurve(n={len(self._v)}, area={signed_area(self):.6g})"

    def __eq__(self, other):
        return isinstance(other, ClosedCurve) and np.array_equal(self._v, other._v)

    __hash__ = None

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Start and end points of every edge."""
        return self._v, _succ(self._v)

    def edge_lengths(self) -> np.ndarray:
        a, b = self.edges()
        return np.hypot(*(b - a).T)

    def reversed(self) -> ClosedCurve:
        return ClosedCurve(self._v[::-1], validate=False)

    def translated(self, dx: float, dy: float) -> ClosedCurve:
        return ClosedCurve(self._v + (dx, dy), validate=False)

    def scaled(self, s: float) -> ClosedCurve:
        return ClosedCurve(self._v * s, validate=False)

    @property
    def is_ccw(self) -> bool:
        return signed_area(self) > 0


@dataclass(frozen=True, eq=False)
class Region:
    """A closed bounded set: outer boundary (CCW) minus holes (CW)."""

    outer: ClosedCurve
    holes: tuple = field(default=())
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "holes", tuple(self.holes))
        if signed_area(self.outer) <= 0:
            raise GeometryError("outer curve must be counterclockwise (positive area)")
        for i, h in enumerate(self.holes):
            if signed_area(h) >= 0:
                raise GeometryError(f"hole {i} must be clockwise (negative area)")
        if self.holes and self.validate:
            hit = _first_crossing(self.curves)
            if hit is not None:
                raise GeometryError("region boundary curves intersect each other")
            oa, ob = self.outer.edges()
            for i, h in enumerate(self.holes):
                if not kernels.even_odd_contains(h.vertices, oa, ob).all():
                    raise GeometryError(f"hole {i} is not inside the outer curve")
                for j, other in enumerate(self.holes):
                    if j != i and kernels.even_odd_contains(h.vertices[:1], *other.edges())[0]:
                        raise GeometryError(f"holes {i} and {j} are nested")
        if area(self) <= 0:
            raise GeometryError("region has non-positive area")

    @classmethod
    def from_points(cls, outer, holes=(), validate: bool = True) -> Region:
        """Build a region from raw vertex lists, fixing orientations."""
        o = ClosedCurve(outer, validate=validate)
        if signed_area(o) < 0:
            o = o.reversed()
        hs = []
        for h in holes:
            c = ClosedCurve(h, validate=validate)
            hs.append(c.reversed() if signed_area(c) > 0 else c)
        return cls(o, tuple(hs), validate=validate)

    @property
    def curves(self) -> tuple:
        return (self.outer,) + self.holes

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edges of all boundary curves, concatenated."""
        parts = [c.edges() for c in self.curves]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

    def bbox(self) -> tuple[float, float, float, float]:
        v = self.outer.vertices
        return float(v[:, 0].min()), float(v[:, 1].min()), float(v[:, 0].max()), float(v[:, 1].max())

    def map_curves(self, fn) -> Region:
        """Apply ``fn`` to every boundary curve, keeping the hole structure."""
        return Region(fn(self.outer), tuple(fn(h) for h in self.holes), validate=False)

    def translated(self, dx: float, dy: float) -> Region:
        return self.map_curves(lambda c: c.translated(dx, dy))

    def scaled(self, s: float) -> Region:
        return self.map_curves(lambda c: c.scaled(s))


def as_regions(obj) -> list:
    """Accept a Region, a ClosedCurve or an iterable of Regions."""
    if isinstance(obj, Region):
        return [obj]
    if isinstance(obj, ClosedCurve):
        return [Region.from_points(obj.vertices, validate=False)]
    return list(obj)


def all_edges(regions: Iterable[Region]) -> tuple[np.ndarray, np.ndarray]:
    parts = [r.edges() for r in regions]
    if not parts:
        return np.zeros((0, 2)), np.zeros((0, 2))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    # centered to limit cancellation for far-from-origin curves
    x = x - x.mean()
    y = y - y.mean()
    return 0.5 * float(np.dot(x, _succ(y)) - np.dot(_succ(x), y))


def _first_crossing(curves: Sequence[ClosedCurve]):
    starts, ends, nxt = [], [], []
    off = 0
    for c in curves:
        a, b = c.edges()
        n = len(a)
        starts.append(a)
        ends.append(b)
        nxt.append(off + (np.arange(n) + 1) % n)
        off += n
    a = np.concatenate(starts)
    b = np.concatenate(ends)
    span = np.ptp(np.concatenate([a, b]), axis=0)
    eps = SIMPLICITY_SLACK * float(np.hypot(*span))
    i, j = kernels.first_crossing(a, b, np.concatenate(nxt), eps)
    return None if i < 0 else (i, j)


def is_simple(curve: ClosedCurve) -> bool:
    return _first_crossing([curve]) is None


def _require_curve(curve) -> ClosedCurve:
    if isinstance(curve, ClosedCurve):
        return curve
    return ClosedCurve(curve, validate=False)


def signed_area(curve: ClosedCurve) -> float:
    """Shoelace area; positive iff counterclockwise."""
    return _require_curve(curve)._area


def area(region: Region) -> float:
    return signed_area(region.outer) - sum(abs(signed_area(h)) for h in region.holes)


def perimeter(curve) -> float:
    """Sum of edge lengths. A Region gives the total over all its boundary curves."""
    if isinstance(curve, Region):
        return sum(perimeter(c) for c in curve.curves)
    return float(_require_curve(curve).edge_lengths().sum())


def turning_angles(curve: ClosedCurve) -> np.ndarray:
    """Signed exterior angle at every vertex (left turns positive)."""
    v = _require_curve(curve).vertices
    e_in = v - _pred(v)
    e_out = _succ(v) - v
    cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    dot = (e_in * e_out).sum(axis=1)
    return np.arctan2(cross, dot)


def curvature_profile(curve: ClosedCurve) -> tuple[np.ndarray, np.ndarray]:
    """Per-vertex curvature and arclength weight.

    ``kappa[i] = theta[i] / w[i]`` where ``w[i]`` is the mean length of the two
    edges meeting at vertex ``i``; the weights sum to the perimeter, and
    ``sum(kappa * w)`` is the total signed turning.
    """
    curve = _require_curve(curve)
    lens = curve.edge_lengths()
    w = 0.5 * (lens + _pred(lens))
    return turning_angles(curve) / w, w


def total_absolute_curvature(curve: ClosedCurve) -> float:
    return float(np.abs(turning_angles(curve)).sum())


def _on_boundary(points: np.ndarray, region: Region) -> np.ndarray:
    a, b = region.edges()
    x0, y0, x1, y1 = region.bbox()
    eps = 1e-12 * max(1.0, math.hypot(x1 - x0, y1 - y0))
    return kernels.min_dist_to_segments(points, a, b) <= eps


def contains_points(region: Region, points) -> np.ndarray:
    """Vectorized containment; boundary points count as inside."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    a, b = region.edges()
    inside = kernels.even_odd_contains(pts, a, b)
    if not inside.all():
        inside |= _on_boundary(pts, region)
    return inside


def contains_point(region: Region, p) -> bool:
    return bool(contains_points(region, [p])[0])


def resample_uniform(curve: ClosedCurve, target_spacing: float,
                     corner_angle: float | None = CORNER_ANGLE) -> ClosedCurve:
    """Resample at (nearly) equal arclength spacing no larger than ``target_spacing``.

    Vertices whose turning angle exceeds ``corner_angle`` are kept and the arcs
    between them are resampled separately. Pass ``corner_angle=None`` to
    resample the curve as a single arc starting at vertex 0.
    """
    curve = _require_curve(curve)
    if not target_spacing > 0:
        raise GeometryError("target_spacing must be positive")
    total = perimeter(curve)
    if target_spacing > total / 3:
        raise GeometryError(
            f"spacing {target_spacing:g} exceeds perimeter/3 = {total / 3:g}")
    v = curve.vertices
    n = len(v)
    lens = curve.edge_lengths()
    corners = []
    if corner_angle is not None:
        corners = np.flatnonzero(np.abs(turning_angles(curve)) > corner_angle).tolist()
    if not corners:
        corners = [0]
        arcs = [(0, n)]
    else:
        arcs = [(c, (corners[(j + 1) % len(corners)] - c) % n or n) for j, c in enumerate(corners)]
    out = []
    for start, count in arcs:
        idx = (start + np.arange(count + 1)) % n
        pts = v[idx]
        seg = lens[idx[:-1]]
        s = np.concatenate([[0.0], np.cumsum(seg)])
        m = max(1, math.ceil(s[-1] / target_spacing - 1e-9))
        t = np.arange(m) * (s[-1] / m)
        x = np.interp(t, s, pts[:, 0])
        y = np.interp(t, s, pts[:, 1])
        out.append(np.column_stack([x, y]))
    return ClosedCurve(np.concatenate(out), validate=False)


def resample_region(region: Region, target_spacing: float,
                    corner_angle: float | None = CORNER_ANGLE) -> Region:
    return region.map_curves(lambda c: resample_uniform(c, target_spacing, corner_angle))


def diameter(region) -> float:
    """Largest distance between two outer-curve vertices."""
    v = region.outer.vertices if isinstance(region, Region) else _require_curve(region).vertices
    if len(v) > 16:
        try:
            from scipy.spatial import ConvexHull
            v = v[ConvexHull(v).vertices]
        except Exception:  # degenerate (collinear) input: brute force all vertices
            pass
    d = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((d ** 2).sum(axis=-1).max()))


def max_spacing(regions) -> float:
    """Longest edge over all boundary curves."""
    return max(float(c.edge_lengths().max()) for r in as_regions(regions) for c in r.curves)


def resample_spline(curve: ClosedCurve, target_spacing: float) -> ClosedCurve:
    """Resample along a periodic cubic spline through the vertices.

    Unlike ``resample_uniform`` the new vertices are not confined to the old
    edges, so repeated resampling of a smooth convex curve does not shrink it.
    """
    from scipy.interpolate import CubicSpline

    curve = _require_curve(curve)
    v = curve.vertices
    lens = curve.edge_lengths()
    s = np.concatenate([[0.0], np.cumsum(lens)])
    total = s[-1]
    if target_spacing > total / 3:
        raise GeometryError(f"spacing {target_spacing:g} exceeds perimeter/3 = {total / 3:g}")
    spline = CubicSpline(s, np.vstack([v, v[:1]]), bc_type="periodic")
    # spline arclength ~ chord length; refine once so the final spacing stays below target
    fine = spline(np.linspace(0.0, total, 8 * len(v) + 1))
    seg = np.hypot(*np.diff(fine, axis=0).T)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    m = max(3, math.ceil(arc[-1] / (0.995 * target_spacing)))
    t = np.interp(np.arange(m) * (arc[-1] / m), arc, np.linspace(0.0, total, len(fine)))
    return ClosedCurve(spline(t), validate=False)
