"""Generators for test shapes with known geometry."""

from __future__ import annotations

import math

import numpy as np

from .geometry import ClosedCurve, Region, resample_uniform


def regular_polygon(n: int, radius: float, center=(0.0, 0.0), phase: float = 0.0) -> ClosedCurve:
    """Regular n-gon inscribed in a circle, counterclockwise."""
    t = phase + 2 * np.pi * np.arange(n) / n
    return ClosedCurve(np.column_stack([center[0] + radius * np.cos(t),
                                        center[1] + radius * np.sin(t)]), validate=False)


def disk(radius: float, center=(0.0, 0.0), n: int | None = None, spacing: float | None = None) -> Region:
    """Disk as a Region; vertex count from ``n`` or from a maximum edge ``spacing``."""
    if n is None:
        spacing = spacing if spacing is not None else radius / 16
        n = max(16, math.ceil(2 * math.pi * radius / spacing))
    return Region(regular_polygon(n, radius, center))


def stadium(cap_radius: float, length: float, spacing: float, center=(0.0, 0.0)) -> Region:
    """Capsule: a ``length`` x ``2*cap_radius`` rectangle with semicircular caps."""
    r, h = cap_radius, length / 2
    n_cap = max(8, math.ceil(math.pi * r / spacing))
    n_side = max(1, math.ceil(length / spacing))
    pts = []
    for i in range(n_side):  # bottom edge, left to right
        pts.append((-h + length * i / n_side, -r))
    for t in np.linspace(-np.pi / 2, np.pi / 2, n_cap + 1)[:-1]:
        pts.append((h + r * math.cos(t), r * math.sin(t)))
    for i in range(n_side):
        pts.append((h - length * i / n_side, r))
    for t in np.linspace(np.pi / 2, 3 * np.pi / 2, n_cap + 1)[:-1]:
        pts.append((-h + r * math.cos(t), r * math.sin(t)))
    pts = np.asarray(pts) + center
    return Region(ClosedCurve(pts, validate=False))


def rounded_rectangle(width: float, height: float, corner_radius: float, spacing: float,
                      center=(0.0, 0.0)) -> Region:
    """Rectangle with circular-arc corners of the given radius."""
    r = corner_radius
    hx, hy = width / 2 - r, height / 2 - r
    pts = []
    n_arc = max(4, math.ceil(0.5 * math.pi * r / spacing))
    corners = [(hx, -hy, -np.pi / 2), (hx, hy, 0.0), (-hx, hy, np.pi / 2), (-hx, -hy, np.pi)]
    for cx, cy, t0 in corners:
        for t in np.linspace(t0, t0 + np.pi / 2, n_arc + 1)[:-1]:
            pts.append((cx + r * math.cos(t), cy + r * math.sin(t)))
        pts.append((cx + r * math.cos(t0 + np.pi / 2), cy + r * math.sin(t0 + np.pi / 2)))
    curve = ClosedCurve(np.asarray(pts) + center, validate=False)
    # densify straight runs
    return Region(resample_uniform(curve, spacing, corner_angle=None))


def radial_curve(radius_fn, spacing: float, center=(0.0, 0.0), fine: int = 4096) -> ClosedCurve:
    """Star-shaped curve ``r(theta)``, resampled to ``spacing``."""
    t = 2 * np.pi * np.arange(fine) / fine
    r = radius_fn(t)
    pts = np.column_stack([center[0] + r * np.cos(t), center[1] + r * np.sin(t)])
    return resample_uniform(ClosedCurve(pts, validate=False), spacing, corner_angle=None)


def perturbed_disk(radius: float, amplitude: float, frequency: int, spacing: float,
                   center=(0.0, 0.0), phase: float = 0.0) -> Region:
    """Circle with a sinusoidal radial perturbation ``r = radius + a cos(f(theta - phase))``."""
    curve = radial_curve(lambda t: radius + amplitude * np.cos(frequency * (t - phase)),
                         spacing, center)
    return Region(curve)


def ellipse(a: float, b: float, spacing: float, center=(0.0, 0.0)) -> Region:
    t = 2 * np.pi * np.arange(4096) / 4096
    pts = np.column_stack([center[0] + a * np.cos(t), center[1] + b * np.sin(t)])
    return Region(resample_uniform(ClosedCurve(pts, validate=False), spacing, corner_angle=None))


def annulus(r_outer: float, r_inner: float, spacing: float, center=(0.0, 0.0)) -> Region:
    outer = disk(r_outer, center, spacing=spacing).outer
    inner = disk(r_inner, center, spacing=spacing).outer.reversed()
    return Region(outer, (inner,))


def l_hexagon(size: float = 2.0, notch: float = 1.0) -> Region:
    """L-shaped hexagon with one reflex corner."""
    s, k = size, notch
    return Region(ClosedCurve([(0, 0), (s, 0), (s, k), (k, k), (k, s), (0, s)]))


def square(side: float = 1.0, origin=(0.0, 0.0)) -> Region:
    x, y = origin
    return Region(ClosedCurve([(x, y), (x + side, y), (x + side, y + side), (x, y + side)]))


def feasible_suite(R: float, count: int = 50, seed: int = 0, spacing: float | None = None) -> list:
    """Varied shapes expected to lie in U_R (callers still verify each one).

    Mix of disks, ellipses, capsules, rounded rectangles, mildly perturbed disks
    and annuli, with parameters drawn from a seeded generator.
    """
    rng = np.random.default_rng(seed)
    h = spacing if spacing is not None else R / 8
    out = []
    kinds = ["disk", "ellipse", "stadium", "rounded", "perturbed", "annulus"]
    for i in range(count):
        kind = kinds[i % len(kinds)]
        c = tuple(rng.uniform(-2 * R, 2 * R, size=2))
        if kind == "disk":
            out.append(disk(R * rng.uniform(1.05, 4.0), c, spacing=h))
        elif kind == "ellipse":
            # curvature max a/b^2 must stay below 1/R
            b = R * rng.uniform(1.6, 3.0)
            a = min(b * rng.uniform(1.0, 1.6), 0.9 * b * b / R)
            out.append(ellipse(a, b, h, c))
        elif kind == "stadium":
            out.append(stadium(R * rng.uniform(1.05, 2.0), R * rng.uniform(0.5, 8.0), h, c))
        elif kind == "rounded":
            r = R * rng.uniform(1.05, 1.5)
            out.append(rounded_rectangle(2 * r + R * rng.uniform(0.2, 4.0),
                                         2 * r + R * rng.uniform(0.2, 4.0), r, h, c))
        elif kind == "perturbed":
            rad = R * rng.uniform(3.0, 4.0)
            f = int(rng.integers(2, 6))
            # keep max |curvature| ~ 1/rad + f^2 a / rad^2 well below 1/R
            amax = 0.5 * (rad * rad / R - rad) / (f * f)
            out.append(perturbed_disk(rad, amax * rng.uniform(0.2, 1.0), f, h, c,
                                      phase=rng.uniform(0, 2 * np.pi)))
        else:
            ri = R * rng.uniform(1.1, 2.0)
            out.append(annulus(ri + R * rng.uniform(2.2, 3.5), ri, h, c))
    return out
