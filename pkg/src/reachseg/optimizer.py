"""Constrained annealing search for minimizers of G_k over layers in U_R.

The constraint set has no cheap projection, so the search proposes local
moves and rejects every candidate that fails the ball test. Only layers a
move touches are re-checked; layers are separate members of U_R and may
overlap each other freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import (EnergyBreakdown, EnergyParams, LayeredSegmentation, fidelity_from_sums,
                     k_upper_bound, total_energy)
from .errors import GeometryError, PreconditionError
from .geometry import ClosedCurve, Region, area, resample_spline, signed_area
from .raster import RasterImage, rasterize
from .shapes import regular_polygon
from .sphere import (check_region, curvature_bound_check, outward_normals, regularize_raster,
                     required_spacing)

MOVE_KINDS = ("bump", "mode", "smooth", "inflate", "translate", "delete", "insert", "swap")
MOVE_WEIGHTS = {"bump": 0.28, "mode": 0.12, "smooth": 0.08, "inflate": 0.12, "translate": 0.2,
                "delete": 0.04, "insert": 0.08, "swap": 0.08}
FEASIBILITY_TOL = 0.02


@dataclass(frozen=True)
class Schedule:
    """Annealing schedule. ``T0=None`` means ``0.05 * G(seed)``."""

    iterations: int = 20000
    T0: float | None = None
    cooling: float = 0.97
    seed: int = 0
    move_scale: float = 0.1
    cool_every: int = 100

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.T0 is not None and self.T0 < 0:
            raise ValueError("T0 must be >= 0")
        if not 0 < self.cooling <= 1:
            raise ValueError("cooling must lie in (0, 1]")
        if not 0 < self.move_scale <= 0.5:
            raise ValueError("move_scale must lie in (0, 0.5]")

    def temperature(self, T0: float, it: int) -> float:
        return T0 * self.cooling ** (it // self.cool_every)


@dataclass
class RunReport:
    best_energy: float
    energy_trace: list  # (iteration, G, k) for the seed and every accepted move
    move_stats: dict
    final: LayeredSegmentation
    feasible: bool
    breakdown: EnergyBreakdown | None = None
    seed_energy: float = float("nan")

    def trace_csv(self) -> str:
        lines = ["iteration,energy,layers"]
        lines += [f"{it},{g!r},{k}" for it, g, k in self.energy_trace]
        return "\n".join(lines) + "\n"


@dataclass
class Move:
    kind: str
    layers: list
    changed: list  # layers with new geometry, to be re-checked
    index: int = -1  # deleted layer, or first of the swapped pair


@dataclass
class Decision:
    accepted: bool
    reason: str  # "infeasible", "improved", "metropolis", "rejected"
    delta: float = float("nan")


def metropolis(delta: float, T: float, rng) -> tuple[bool, str]:
    """Strict improvements always pass; ties keep the incumbent; T=0 is greedy."""
    if delta < 0:
        return True, "improved"
    if T <= 0 or delta == 0:
        return False, "rejected"
    if rng.random() < math.exp(-delta / T):
        return True, "metropolis"
    return False, "rejected"


def layer_is_feasible(layer: Region, R: float, tol: float = FEASIBILITY_TOL) -> bool:
    """Cheap curvature prefilter, then the full ball test."""
    try:
        if not curvature_bound_check(layer, R):
            return False
        return check_region(layer, R, tol).passed
    except (PreconditionError, GeometryError):
        return False


def accept(current_G: float, candidate: LayeredSegmentation, img: RasterImage,
           params: EnergyParams, T: float, rng, changed=None) -> Decision:
    """Feasibility gate followed by the Metropolis rule.

    ``changed`` lists the layer indices to re-check (all layers by default).
    """
    idx = range(candidate.k) if changed is None else changed
    if not all(layer_is_feasible(candidate.layers[i], params.R) for i in idx):
        return Decision(False, "infeasible")
    G = total_energy(candidate, img, params, check=False).G
    ok, why = metropolis(G - current_G, T, rng)
    return Decision(ok, why, G - current_G)


def seed_segmentation(img: RasterImage, R: float, k_hint: int) -> LayeredSegmentation:
    """Blur, Otsu threshold, regularize each connected component at radius R.

    Keeps up to ``k_hint`` of the largest resulting regions, one per layer.
    The blur (about R/8) suppresses pixel noise that would otherwise leave
    the thresholded boundary too rough for the ball test.
    """
    from scipy import ndimage
    from skimage.filters import threshold_otsu

    grid = img.grid
    if R / grid.pixel_size < 2:
        raise PreconditionError("R must span at least 2 pixels")
    g = img.values
    if k_hint < 1 or g.max() == g.min():
        return LayeredSegmentation((), grid)
    g = ndimage.gaussian_filter(g, max(1.0, R / (8 * grid.pixel_size)), mode="nearest")
    mask = g > threshold_otsu(g)
    labels, count = ndimage.label(mask)
    found = []
    # components become separate layers, so each is regularized on its own:
    # the exterior test between layers does not apply
    for lab in range(1, count + 1):
        comp = labels == lab
        if comp.sum() * grid.pixel_area < 0.5 * math.pi * R * R:
            continue
        found += regularize_raster(comp, R, grid.pixel_size, grid.origin, tol=FEASIBILITY_TOL)
    found.sort(key=lambda r: -area(r))
    return LayeredSegmentation(tuple(found[:k_hint]), grid)


def disk_layer(center, R: float) -> Region:
    n = math.ceil(2 * math.pi * R / required_spacing(R))
    return Region(regular_polygon(n, R, center))


class _Chain:
    """Current state plus the per-layer caches used for O(changed) updates."""

    def __init__(self, img: RasterImage, params: EnergyParams, layers):
        self.img = img
        self.params = params
        self.g = img.values
        self.g2 = img.values ** 2
        self.layers = list(layers)
        self.masks = [rasterize(L, img.grid) for L in self.layers]
        self.geom = [self._geom(L) for L in self.layers]
        self.G = self.energy(self.masks, self.geom)

    def _geom(self, layer: Region) -> float:
        from .energy import curvature_energy
        p = self.params
        return p.beta * area(layer) + p.gamma * curvature_energy(layer, p.phi)

    def energy(self, masks, geom) -> float:
        p = self.params
        pa = self.img.grid.pixel_area
        covered = np.zeros(self.g.shape, dtype=bool)
        fid = []
        for m in masks:
            vis = m & ~covered
            covered |= m
            fid.append(fidelity_from_sums(self.g[vis].sum(), self.g2[vis].sum(),
                                          int(vis.sum()), pa))
        bg = ~covered
        fid.append(fidelity_from_sums(self.g[bg].sum(), self.g2[bg].sum(), int(bg.sum()), pa))
        return float(p.alpha * math.fsum(fid) + math.fsum(geom))

    def residual(self) -> np.ndarray:
        covered = np.zeros(self.g.shape, dtype=bool)
        approx = np.zeros(self.g.shape)
        for m in self.masks:
            vis = m & ~covered
            covered |= m
            if vis.any():
                approx[vis] = self.g[vis].mean()
        bg = ~covered
        if bg.any():
            approx[bg] = self.g[bg].mean()
        return (self.g - approx) ** 2


def _jitter_scale(schedule: Schedule, R: float, rng) -> float:
    # log-uniform over two decades below move_scale * R
    return schedule.move_scale * R * 10.0 ** (-2.0 * rng.random())


def _offset_curve(curve: ClosedCurve, disp: np.ndarray) -> ClosedCurve:
    nu = outward_normals(curve)
    return ClosedCurve(curve.vertices + disp[:, None] * nu, validate=True)


def _smoothed(curve: ClosedCurve, rng) -> ClosedCurve:
    """Blend toward a Gaussian-filtered copy, rescaled to the original area."""
    from scipy.ndimage import gaussian_filter1d

    v = curve.vertices
    sigma = rng.uniform(0.5, max(1.0, len(v) / 8))
    f = gaussian_filter1d(v, sigma, axis=0, mode="wrap")
    w = rng.uniform(0.1, 1.0)
    out = (1 - w) * v + w * f
    c = out.mean(axis=0)
    a0 = abs(signed_area(curve))
    a1 = abs(signed_area(ClosedCurve(out, validate=False)))
    out = c + (out - c) * math.sqrt(a0 / a1)
    return ClosedCurve(out, validate=True)


def _finish(layer_curves, R: float) -> Region:
    h = required_spacing(R)
    curves = [resample_spline(c, h) for c in layer_curves]
    return Region(curves[0], tuple(curves[1:]))


def propose_move(chain_layers, rng, R: float, schedule: Schedule, img: RasterImage | None = None,
                 residual=None, allow_insert: bool = True, kind: str | None = None):
    """Draw one move (a ``Move``); raises ``GeometryError`` for degenerate candidates."""
    layers = list(chain_layers)
    k = len(layers)
    if kind is None:
        allowed = [m for m in MOVE_KINDS
                   if (k > 0 or m == "insert") and (m != "insert" or allow_insert)
                   and (m != "swap" or k >= 1)]
        if not allowed:
            return Move("none", layers, [])
        w = np.array([MOVE_WEIGHTS[m] for m in allowed])
        kind = allowed[rng.choice(len(allowed), p=w / w.sum())]
    if kind == "insert":
        if img is None:
            raise ValueError("insert needs the image")
        res = residual if residual is not None else np.ones(img.grid.shape)
        flat = res.ravel()
        tot = flat.sum()
        p = flat / tot if tot > 0 else None
        idx = int(rng.choice(flat.size, p=p))
        r, c = divmod(idx, img.grid.width)
        pos = int(rng.integers(0, k + 1))
        layers.insert(pos, disk_layer(img.grid.center_of(r, c), R))
        return Move(kind, layers, [pos], pos)
    if k == 0:
        return Move("none", layers, [])
    j = int(rng.integers(0, k))
    if kind == "delete":
        del layers[j]
        return Move(kind, layers, [], j)
    if kind == "swap":
        if k == 1:
            return Move(kind, layers, [], 0)
        j = int(rng.integers(0, k - 1))
        layers[j], layers[j + 1] = layers[j + 1], layers[j]
        return Move(kind, layers, [], j)
    layer = layers[j]
    s = _jitter_scale(schedule, R, rng)
    if kind == "translate":
        dx, dy = rng.normal(0.0, s, size=2)
        layers[j] = layer.translated(dx, dy)
        return Move(kind, layers, [j], j)
    curves = list(layer.curves)
    if kind == "inflate":
        d = rng.normal(0.0, s)
        curves = [_offset_curve(c, np.full(len(c), d)) for c in curves]
    elif kind == "bump":
        ci = 0 if len(curves) == 1 else int(rng.integers(0, len(curves)))
        c = curves[ci]
        n = len(c)
        half = int(rng.integers(1, max(2, n // 4) + 1))
        center = int(rng.integers(0, n))
        t = np.arange(-half, half + 1)
        taper = np.cos(0.5 * np.pi * t / (half + 1)) ** 2
        disp = np.zeros(n)
        disp[(center + t) % n] = rng.normal(0.0, s) * taper
        curves[ci] = _offset_curve(c, disp)
    elif kind == "mode":
        # low-frequency wave along the whole curve: ellipticity, triangularity, ...
        ci = 0 if len(curves) == 1 else int(rng.integers(0, len(curves)))
        c = curves[ci]
        theta = 2 * np.pi * np.arange(len(c)) / len(c)
        m = int(rng.integers(2, 7))
        disp = rng.normal(0.0, s) * np.cos(m * theta + rng.uniform(0, 2 * np.pi))
        curves[ci] = _offset_curve(c, disp)
    elif kind == "smooth":
        curves = [_smoothed(c, rng) for c in curves]
    else:
        raise ValueError(f"unknown move {kind!r}")
    layers[j] = _finish(curves, R)
    return Move(kind, layers, [j], j)


def _run(img: RasterImage, params: EnergyParams, schedule: Schedule, init: LayeredSegmentation,
         k_max: int | None, variable_k: bool, debug: bool) -> RunReport:
    rng = np.random.default_rng(schedule.seed)
    R = params.R
    chain = _Chain(img, params, init.layers)
    for L in chain.layers:
        if not layer_is_feasible(L, R):
            raise PreconditionError("initial segmentation has a layer outside U_R")
    T0 = schedule.T0 if schedule.T0 is not None else 0.05 * chain.G
    stats = {m: {"proposed": 0, "accepted": 0, "rejected_constraint": 0, "rejected_energy": 0}
             for m in MOVE_KINDS}
    trace = [(0, chain.G, len(chain.layers))]
    best_G, best_layers = chain.G, list(chain.layers)
    residual = chain.residual()
    for it in range(1, schedule.iterations + 1):
        T = schedule.temperature(T0, it)
        k = len(chain.layers)
        bound = k_upper_bound(best_G, params) if variable_k else k_max
        try:
            move = propose_move(chain.layers, rng, R, schedule, img, residual,
                                allow_insert=k + 1 <= bound)
        except GeometryError:
            continue
        kind, cand, changed = move.kind, move.layers, move.changed
        if kind == "none":
            continue
        st = stats[kind]
        st["proposed"] += 1
        if not all(layer_is_feasible(cand[i], R) for i in changed):
            st["rejected_constraint"] += 1
            continue
        j = move.index
        if kind == "insert":
            pos = j
            masks = chain.masks[:pos] + [rasterize(cand[pos], img.grid)] + chain.masks[pos:]
            geom = chain.geom[:pos] + [chain._geom(cand[pos])] + chain.geom[pos:]
        elif kind == "delete":
            masks = chain.masks[:j] + chain.masks[j + 1:]
            geom = chain.geom[:j] + chain.geom[j + 1:]
        elif kind == "swap":
            masks, geom = list(chain.masks), list(chain.geom)
            if k > 1:
                masks[j], masks[j + 1] = masks[j + 1], masks[j]
                geom[j], geom[j + 1] = geom[j + 1], geom[j]
        else:
            masks = list(chain.masks)
            geom = list(chain.geom)
            masks[j] = rasterize(cand[j], img.grid)
            geom[j] = chain._geom(cand[j])
        G_new = chain.energy(masks, geom)
        ok, _ = metropolis(G_new - chain.G, T, rng)
        if not ok:
            st["rejected_energy"] += 1
            continue
        st["accepted"] += 1
        chain.layers, chain.masks, chain.geom, chain.G = cand, masks, geom, G_new
        if debug:
            assert all(check_region(L, R, FEASIBILITY_TOL).passed for L in chain.layers)
            assert len(chain.layers) <= k_upper_bound(chain.G, params)
        trace.append((it, chain.G, len(chain.layers)))
        if kind in ("insert", "delete", "swap") or it % 50 == 0:
            residual = chain.residual()
        if chain.G < best_G:
            best_G, best_layers = chain.G, list(chain.layers)
    final = LayeredSegmentation(tuple(best_layers), img.grid)
    bd = total_energy(final, img, params, check=True)
    return RunReport(best_G, trace, stats, final, bd.feasible, bd, trace[0][1])


def optimize_fixed_k(img: RasterImage, params: EnergyParams, schedule: Schedule, k: int,
                     init: LayeredSegmentation | None = None, debug: bool = False) -> RunReport:
    """Search over at most ``k`` layers (empty layers are simply absent)."""
    if init is None:
        init = seed_segmentation(img, params.R, k)
    if init.k > k:
        raise PreconditionError(f"initial segmentation has {init.k} layers, more than k={k}")
    return _run(img, params, schedule, init, k, variable_k=False, debug=debug)


def optimize_variable_k(img: RasterImage, params: EnergyParams, schedule: Schedule,
                        init: LayeredSegmentation | None = None, debug: bool = False) -> RunReport:
    """Layer count free; inserts beyond ``k_upper_bound(best G)`` are never proposed."""
    if init is None:
        g_empty = total_energy(LayeredSegmentation((), img.grid), img, params, check=False).G
        init = seed_segmentation(img, params.R, max(0, k_upper_bound(g_empty, params)))
    return _run(img, params, schedule, init, None, variable_k=True, debug=debug)
