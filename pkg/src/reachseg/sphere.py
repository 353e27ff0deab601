"""Uniform interior/exterior ball condition (membership in U_R).

A set E is in U_R when every boundary point p admits two radius-R balls
tangent at p, one inside E and one disjoint from E. The checker tests this
at polygon vertices with the interior and exterior centers placed along the
vertex normal, and measures their distance to the whole boundary, so the
exterior test sees every component of the set (it is nonlocal).

Approximate membership (``tol``) is a numerical convention: the condition
itself is a hard constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import kernels
from .errors import GeometryError, PreconditionError
from .geometry import (ClosedCurve, _pred, _succ, Region, all_edges, area, as_regions, contains_points,
                       curvature_profile, diameter, max_spacing, resample_spline, resample_uniform,
                       signed_area)

DEFAULT_TOL = 0.02
SAMPLES_PER_RADIUS = 8
GRAPH_SLOPE_SLACK = 0.05


def outward_normals(curve: ClosedCurve) -> np.ndarray:
    """Unit angle-bisector normals pointing to the right of the direction of travel.

    For a counterclockwise outer curve (and a clockwise hole) this is the
    outward normal of the enclosed set.
    """
    v = curve.vertices if isinstance(curve, ClosedCurve) else np.asarray(curve, dtype=float)
    e_out = _succ(v) - v
    e_in = v - _pred(v)
    n_out = np.column_stack([e_out[:, 1], -e_out[:, 0]]) / np.hypot(*e_out.T)[:, None]
    n_in = np.column_stack([e_in[:, 1], -e_in[:, 0]]) / np.hypot(*e_in.T)[:, None]
    s = n_in + n_out
    norm = np.hypot(*s.T)
    bad = np.flatnonzero(norm < 1e-12)
    if len(bad):
        raise GeometryError(f"normal undefined at vertex {bad[0]}: the curve reverses direction")
    return s / norm[:, None]


def ball_centers(curve: ClosedCurve, i: int, R: float):
    """Centers (interior, exterior) of the radius-R balls tangent at vertex ``i``."""
    p = curve.vertices[i]
    nu = outward_normals(curve)[i]
    return p - R * nu, p + R * nu


@dataclass
class SphereReport:
    """Per-vertex outcome of the ball test.

    Margins are ``(signed distance of the ball center to the boundary - R) / R``;
    the distance is negative when the center lies on the wrong side, so a
    margin below ``-tol`` always means a failure.
    """

    radius: float
    tol: float
    region_index: np.ndarray
    curve_index: np.ndarray
    vertex_index: np.ndarray
    interior_ok: np.ndarray
    exterior_ok: np.ndarray
    interior_margin: np.ndarray
    exterior_margin: np.ndarray
    note: str = field(default="approximate membership: vertex sampling with relative tolerance tol")

    @property
    def passed(self) -> bool:
        return bool(self.interior_ok.all() and self.exterior_ok.all())

    # `pass` is a keyword, so the report field is exposed under this name too
    @property
    def pass_(self) -> bool:
        return self.passed

    @property
    def worst_violation(self) -> float:
        if len(self.interior_margin) == 0:
            return 0.0
        worst = max(-self.interior_margin.min(), -self.exterior_margin.min())
        return float(max(0.0, worst))

    @property
    def per_vertex(self) -> list:
        return [(int(g), bool(a), bool(b), float(c), float(d)) for g, a, b, c, d in zip(
            range(len(self.vertex_index)), self.interior_ok, self.exterior_ok,
            self.interior_margin, self.exterior_margin)]

    def failing_regions(self) -> set:
        bad = ~(self.interior_ok & self.exterior_ok)
        return set(int(r) for r in self.region_index[bad])

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "tol": self.tol,
            "pass": self.passed,
            "worst_violation": self.worst_violation,
            "note": self.note,
            "per_vertex": [
                {"region": int(r), "curve": int(c), "vertex": int(v),
                 "interior_ok": bool(a), "exterior_ok": bool(b),
                 "interior_margin": float(im), "exterior_margin": float(em)}
                for r, c, v, a, b, im, em in zip(
                    self.region_index, self.curve_index, self.vertex_index, self.interior_ok,
                    self.exterior_ok, self.interior_margin, self.exterior_margin)
            ],
        }


def required_spacing(R: float) -> float:
    return R / SAMPLES_PER_RADIUS


def check_spacing(regions, R: float) -> None:
    h = max_spacing(regions)
    need = required_spacing(R)
    if h > need * (1 + 1e-9):
        raise PreconditionError(
            f"curve under-sampled for R={R:g}: max edge {h:.6g} > required spacing {need:.6g}; "
            f"resample to spacing <= {need:.6g}")


def check_region(regions, R: float, tol: float = DEFAULT_TOL) -> SphereReport:
    """Test the interior and exterior ball condition at every boundary vertex.

    ``regions`` may be a single Region or a list treated as one set: interior
    balls are tested against their own component, exterior balls against all
    components.
    """
    regions = as_regions(regions)
    if not R > 0:
        raise PreconditionError("R must be positive")
    if tol < 0:
        raise PreconditionError("tol must be non-negative")
    check_spacing(regions, R)
    ea, eb = all_edges(regions)
    cols = {k: [] for k in ("reg", "cur", "ver", "iok", "eok", "im", "em")}
    for ri, region in enumerate(regions):
        ra, rb = region.edges()
        for ci, curve in enumerate(region.curves):
            p = curve.vertices
            nu = outward_normals(curve)
            inner = p - R * nu
            outer = p + R * nu
            d_in = kernels.min_dist_to_segments(inner, ra, rb)
            in_ok_side = contains_points(region, inner)
            d_out = kernels.min_dist_to_segments(outer, ea, eb)
            out_ok_side = np.ones(len(p), dtype=bool)
            for other in regions:
                out_ok_side &= ~contains_points(other, outer)
            im = (np.where(in_ok_side, d_in, -d_in) - R) / R
            em = (np.where(out_ok_side, d_out, -d_out) - R) / R
            n = len(p)
            cols["reg"].append(np.full(n, ri))
            cols["cur"].append(np.full(n, ci))
            cols["ver"].append(np.arange(n))
            cols["iok"].append(in_ok_side & (d_in >= R * (1 - tol)))
            cols["eok"].append(out_ok_side & (d_out >= R * (1 - tol)))
            cols["im"].append(im)
            cols["em"].append(em)
    cat = {k: np.concatenate(v) if v else np.zeros(0) for k, v in cols.items()}
    return SphereReport(R, tol, cat["reg"].astype(int), cat["cur"].astype(int),
                        cat["ver"].astype(int), cat["iok"].astype(bool), cat["eok"].astype(bool),
                        cat["im"], cat["em"])


def in_class(regions, R: float, tol: float = DEFAULT_TOL) -> bool:
    return check_region(regions, R, tol).passed


def curvature_bound_check(regions, R: float) -> bool:
    """Cheap necessary condition: max |curvature| <= (1/R)(1 + 8 spacing/R)."""
    regions = as_regions(regions)
    h = max_spacing(regions)
    kmax = max(float(np.abs(curvature_profile(c)[0]).max()) for r in regions for c in r.curves)
    return kmax <= (1.0 / R) * (1.0 + 8.0 * h / R)


def graph_slopes(region: Region, R: float, i: int, curve: int = 0):
    """Local graph of the boundary around vertex ``i`` in the tangent frame.

    Returns ``(x, slope, bound)`` for the contiguous run of vertices inside the
    box ``|x| < sqrt(3) R / 2``, ``|z| < R`` (z along the outward normal at
    vertex ``i``), where ``bound = |x| / sqrt(R^2 - x^2)``.
    """
    c = region.curves[curve]
    v = c.vertices
    n = len(v)
    nu = outward_normals(c)
    ez = nu[i]
    ex = np.array([-ez[1], ez[0]])
    if not np.isfinite(ex).all() or abs(np.hypot(*ex) - 1) > 1e-9:
        raise GeometryError("cannot build a tangent frame at this vertex")
    rho = math.sqrt(3) * R / 2
    rel = v - v[i]
    qx = rel @ ex
    qz = rel @ ez

    def inside(j):
        return abs(qx[j]) < rho and abs(qz[j]) < R

    run = [i]
    for step in (1, -1):
        j = (i + step) % n
        while j != i and inside(j) and j not in run:
            run.append(j)
            j = (j + step) % n
    run = np.array(sorted(run, key=lambda j: qx[j]))
    t = np.column_stack([-nu[run, 1], nu[run, 0]])
    tx = t @ ex
    tz = t @ ez
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(np.abs(tx) > 1e-15, tz / tx, np.inf)
    x = qx[run]
    bound = np.abs(x) / np.sqrt(R * R - x * x)
    return x, slope, bound


def verify_graph_bound(region: Region, R: float, i: int, curve: int = 0,
                       tol: float = DEFAULT_TOL, checked: bool = False) -> bool:
    """Slope of the local boundary graph stays below ``|x|/sqrt(R^2-x^2)`` (+0.05)."""
    if not checked and not check_region(region, R, tol).passed:
        raise PreconditionError("verify_graph_bound requires a region passing check_region")
    _, slope, bound = graph_slopes(region, R, i, curve)
    return bool(np.all(np.abs(slope) <= bound + GRAPH_SLOPE_SLACK))


def packing_lower_bound(region, R: float, tol: float = DEFAULT_TOL,
                        checked: bool = False) -> tuple[int, bool]:
    """Number ``m = floor(diam / 4R)`` of disjoint R-balls a connected set must hold,
    and whether its area is at least ``m * pi * R^2``."""
    regions = as_regions(region)
    if len(regions) != 1:
        raise PreconditionError(
            f"packing bound applies to connected sets; got {len(regions)} components, "
            "apply it to each component separately")
    (reg,) = regions
    if not checked and not check_region(reg, R, tol).passed:
        raise PreconditionError("packing_lower_bound requires a region passing check_region")
    m = math.floor(diameter(reg) / (4 * R))
    return m, area(reg) >= m * math.pi * R * R


def disk_structure(radius_px: float) -> np.ndarray:
    r = int(math.floor(radius_px))
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    return xx * xx + yy * yy <= radius_px * radius_px


def erode_disk(mask: np.ndarray, radius_px: float, border: bool = False) -> np.ndarray:
    """Erosion by ``disk_structure(radius_px)``; pixels outside the array take value ``border``."""
    if not mask.any():
        return mask.copy()
    if border:
        if mask.all():
            return mask.copy()
        return ndimage.distance_transform_edt(mask) > radius_px
    d = ndimage.distance_transform_edt(np.pad(mask, 1))[1:-1, 1:-1]
    return d > radius_px


def dilate_disk(mask: np.ndarray, radius_px: float) -> np.ndarray:
    if not mask.any():
        return mask.copy()
    return ndimage.distance_transform_edt(~mask) <= radius_px


def open_close_disk(mask: np.ndarray, radius_px: float, keep_px: float = 0.0) -> np.ndarray:
    """Opening then closing by a disk, via exact Euclidean distance transforms.

    Same result as binary morphology with ``disk_structure(radius_px)`` but
    linear in the pixel count. With ``keep_px > 0`` both steps are softened:
    the opening keeps original pixels within ``keep_px`` of the opened set
    (and the closing, dually, only adds pixels farther than ``keep_px`` from
    the original background), so pixel-staircase detail survives while specks,
    thin necks and narrow gaps are still removed.
    """
    def soft_open(m, border):
        o = dilate_disk(erode_disk(m, radius_px, border), radius_px)
        return m & dilate_disk(o, keep_px) if keep_px > 0 else o

    m = soft_open(mask, False)
    # outside the array is background, so foreground of the complement
    return ~soft_open(~m, True)


def _smooth_closed(pts: np.ndarray, step: float, sigma: float) -> np.ndarray:
    c = resample_uniform(ClosedCurve(pts, validate=False), step, corner_angle=None)
    v = c.vertices
    s = sigma / step
    return np.column_stack([ndimage.gaussian_filter1d(v[:, 0], s, mode="wrap"),
                            ndimage.gaussian_filter1d(v[:, 1], s, mode="wrap")])


def regularize_raster(mask, R: float, pixel_size: float = 1.0, origin=(0.0, 0.0),
                      tol: float = 0.05) -> list:
    """Morphological open/close by a radius-R disk, then contour extraction.

    Returns Regions (jointly, as one set) passing ``check_region`` at ``tol``;
    anything failing is discarded. Pixel ``(r, c)`` has its center at
    ``origin + ((c + .5) h, (r + .5) h)``.

    The disk is one pixel smaller than R and the morphology keeps two pixels
    of the original boundary (see ``open_close_disk``): an exact R-disk is
    degenerate under opening on a pixel grid. The ball test on the output is
    what guarantees membership.
    """
    mask = np.asarray(mask, dtype=bool)
    r_px = R / pixel_size
    if r_px < 2:
        raise PreconditionError(f"R must span at least 2 pixels (got {r_px:g})")
    pad = int(math.ceil(r_px)) + 4
    # padding with background keeps the complement connected around the frame
    m = open_close_disk(np.pad(mask, pad), r_px - 1.0, keep_px=2.0)
    labels, count = ndimage.label(m)
    regions = []
    for lab in range(1, count + 1):
        comp = labels == lab
        # noisy boundaries need more contour smoothing than clean ones
        for sigma in sorted({2.0 * pixel_size, max(2.0 * pixel_size, R / 8),
                             max(2.0 * pixel_size, R / 4)}):
            reg = _component_region(comp, pad, R, pixel_size, origin, sigma)
            if reg is not None:
                reg = _repair(reg, R, tol, pixel_size)
            if reg is not None:
                regions.append(reg)
                break
    # drop the smallest offending component until the whole set passes
    while regions:
        rep = check_region(regions, R, tol)
        if rep.passed:
            break
        bad = rep.failing_regions()
        worst = min(bad, key=lambda k: area(regions[k]))
        regions.pop(worst)
    return regions


def _grow_curves(region: Region, delta: float, R: float) -> Region:
    """Move every boundary curve ``delta`` away from the area it encloses."""
    curves = []
    for c in region.curves:
        nu = outward_normals(c)
        sign = 1.0 if signed_area(c) > 0 else -1.0
        moved = ClosedCurve(c.vertices + sign * delta * nu)
        curves.append(ClosedCurve(resample_spline(moved, required_spacing(R)).vertices))
    return Region(curves[0], tuple(curves[1:]))


def _repair(region: Region, R: float, tol: float, pixel_size: float):
    """Smallest sub-pixel growth of the curves that passes the ball test, if any.

    Contours traced from pixel-center masks sit a fraction of a pixel inside
    the true boundary in places, and a curve of radius ``r < R`` misses the
    interior test by ``2 (R - r) / R``; growing each curve slightly fixes that.
    """
    for frac in (0.0, 0.25, 0.5, 1.0, 1.5, 2.0):
        try:
            cand = region if frac == 0 else _grow_curves(region, frac * pixel_size, R)
            if check_region(cand, R, tol).passed:
                return cand
        except GeometryError:
            continue
    return None


def _component_region(comp, pad, R, pixel_size, origin, sigma):
    from skimage import measure

    # light blur gives sub-pixel contours instead of the pixel staircase
    f = ndimage.gaussian_filter(np.pad(comp, 1).astype(float), 1.0)
    curves = []
    for cont in measure.find_contours(f, 0.5):
        if len(cont) < 8:
            continue
        rows = cont[:, 0] - 1 - pad
        cols = cont[:, 1] - 1 - pad
        pts = np.column_stack([origin[0] + (cols + 0.5) * pixel_size,
                               origin[1] + (rows + 0.5) * pixel_size])
        if np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        try:
            sm = _smooth_closed(pts, 0.5 * pixel_size, sigma)
            curves.append(resample_uniform(ClosedCurve(sm, validate=False),
                                           required_spacing(R), corner_angle=None))
        except GeometryError:
            continue
    if not curves:
        return None
    curves.sort(key=lambda c: -abs(signed_area(c)))
    try:
        return Region.from_points(curves[0].vertices, [c.vertices for c in curves[1:]])
    except GeometryError:
        return None
