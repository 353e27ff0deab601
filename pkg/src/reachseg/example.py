"""The ball-minimizer experiment: for g the indicator of B(0, R), R > 1, the
disk B(0, R) itself minimizes the one-layer energy.

With phi = 1 + kappa^2 the disk costs ``beta pi R^2 + gamma (2 pi R + 2 pi / R)``
and the empty set costs ``alpha (pi R^2 - pi^2 R^4 / |Omega|)``. On
``Omega = [-2.5R, 2.5R]^2`` the weights are chosen so the second is at least
the first, and then the disk must also beat every other feasible set.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .convergence import hausdorff_distance
from .energy import EnergyParams, LayeredSegmentation, PhiModel, total_energy
from .errors import PreconditionError
from .geometry import Region, perimeter, resample_spline
from .optimizer import Schedule, optimize_fixed_k, seed_segmentation
from .raster import Grid, RasterImage
from .shapes import disk, perturbed_disk, stadium
from .sphere import check_region

HALF_WIDTH = 2.5  # Omega = [-2.5R, 2.5R]^2, so |Omega| = 25 R^2
NOISE_SIGMA = 0.35
SEED_SHIFT = (0.15, -0.1)  # seed displacement in units of R
SEED_SCALE = 1.08


def disk_energy(R: float, beta: float, gamma: float) -> float:
    return beta * math.pi * R * R + gamma * (2 * math.pi * R + 2 * math.pi / R)


def empty_energy(R: float, alpha: float, omega_area: float) -> float:
    return alpha * (math.pi * R * R - math.pi ** 2 * R ** 4 / omega_area)


@dataclass
class Competitor:
    name: str
    energy: float
    perimeter: float


@dataclass
class BallReport:
    R: float
    grid: int
    alpha: float
    beta: float
    gamma: float
    G_disk: float
    G_disk_analytic: float
    G_empty: float
    G_empty_analytic: float
    competitors: list = field(default_factory=list)
    disk_wins: bool = False
    optimized_energy: float | None = None
    optimized_gap: float | None = None  # relative to the analytic disk energy
    hausdorff_px: float | None = None
    optimizer_seconds: float | None = None
    optimizer_feasible: bool | None = None

    @property
    def passed(self) -> bool:
        ok = self.disk_wins
        if self.optimized_energy is not None:
            ok = ok and abs(self.optimized_gap) <= 0.02 and self.hausdorff_px <= 3.0
        return ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_text(self) -> str:
        lines = [
            f"R = {self.R:g}, Omega = [-{HALF_WIDTH * self.R:g}, {HALF_WIDTH * self.R:g}]^2, "
            f"grid {self.grid}x{self.grid}",
            f"alpha = {self.alpha:g}, beta = {self.beta:g}, gamma = {self.gamma:g}",
            f"G(disk)  = {self.G_disk:.6f}  (closed form {self.G_disk_analytic:.6f})",
            f"G(empty) = {self.G_empty:.6f}  (closed form {self.G_empty_analytic:.6f})",
            "competitor,energy,perimeter",
        ]
        lines += [f"{c.name},{c.energy:.6f},{c.perimeter:.6f}" for c in self.competitors]
        lines.append(f"disk is the strict minimum: {'yes' if self.disk_wins else 'no'}")
        if self.optimized_energy is not None:
            lines.append(f"optimizer: G = {self.optimized_energy:.6f} "
                         f"({100 * self.optimized_gap:+.3f}% vs closed form), "
                         f"Hausdorff {self.hausdorff_px:.3f} px, {self.optimizer_seconds:.1f} s")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines) + "\n"


def choose_weights(R: float, omega_area: float, alpha: float = 10.0, beta: float = 1.0,
                   gamma: float = 1.0, max_doublings: int = 40) -> float:
    """Smallest ``alpha * 2^j`` making the empty set no cheaper than the disk."""
    need = disk_energy(R, beta, gamma)
    per_alpha = empty_energy(R, 1.0, omega_area)
    if per_alpha > 0:
        for _ in range(max_doublings + 1):
            if alpha * per_alpha >= need:
                return alpha
            alpha *= 2
    raise PreconditionError(
        f"no alpha satisfies alpha (pi R^2 - pi^2 R^4 / |Omega|) >= beta pi R^2 + gamma (2 pi R + "
        f"2 pi / R): left side per unit alpha {per_alpha:.6g}, right side {need:.6g}, "
        f"|Omega| = {omega_area:.6g}")


def competitors(R: float, seed: int = 0, count: int = 20) -> list:
    """Seeded feasible alternatives to the disk: (name, Region) pairs.

    Shifted disks, larger disks, perturbed larger disks and stadiums whose
    perimeter exceeds ``2 pi R + R``; every one passes the ball test.
    """
    rng = np.random.default_rng(seed)
    h = R / 16
    out = []
    kinds = ["shift"] * 6 + ["larger"] * 5 + ["wavy"] * 5 + ["stadium"] * 4
    while len(kinds) < count:
        kinds.append(kinds[len(kinds) % 20])
    for kind in kinds[:count]:
        if kind == "shift":
            d = R * rng.uniform(0.05, 0.5)
            t = rng.uniform(0, 2 * math.pi)
            reg = disk(R, (d * math.cos(t), d * math.sin(t)), spacing=h)
            name = f"shift_{d / R:.3f}R"
        elif kind == "larger":
            r = R * rng.uniform(1.05, 1.5)
            reg = disk(r, spacing=h)
            name = f"disk_{r / R:.3f}R"
        elif kind == "wavy":
            rho = R * rng.uniform(1.3, 1.8)
            f = int(rng.integers(3, 6))
            # spend half the curvature budget 1/R - 1/rho on the wave
            a = 0.5 * (1 / R - 1 / rho) * rho * rho / (f * f)
            phase = rng.uniform(0, 2 * math.pi)
            reg = perturbed_disk(rho, a, f, h, phase=phase)
            while not check_region(reg, R).passed:
                a *= 0.5
                reg = perturbed_disk(rho, a, f, h, phase=phase)
            name = f"wavy_{rho / R:.3f}R_f{f}"
        else:
            r = R * rng.uniform(1.0, 1.2)
            length = R * rng.uniform(1.0, 1.6)
            reg = stadium(r, length, h)
            name = f"stadium_{r / R:.3f}R_{length / R:.3f}R"
        out.append((name, reg))
    return out


def example_ball(R: float, grid: int = 200, seed: int = 0, optimize: bool = False,
                 alpha: float = 10.0, beta: float = 1.0, gamma: float = 1.0,
                 iterations: int = 20000) -> BallReport:
    """Evaluate the disk, the empty set and 20 competitors; optionally run the optimizer.

    The optimizer starts from a segmentation of the image with Gaussian noise
    (sigma 0.35, drawn from ``seed``), displaced and enlarged, and works on the
    clean image.
    """
    if not R > 1:
        raise PreconditionError(f"the ball example needs R > 1 (got {R:g})")
    frame = Grid.square(HALF_WIDTH * R, grid)
    alpha = choose_weights(R, frame.area, alpha, beta, gamma)
    params = EnergyParams(alpha, beta, gamma, R, PhiModel.power(2))
    truth = disk(R, n=4096)
    img = RasterImage.indicator(truth, frame)

    def G(layers):
        return total_energy(LayeredSegmentation(tuple(layers), frame), img, params, check=False).G

    ball = disk(R, n=512)
    rep = BallReport(R, grid, alpha, beta, gamma,
                     G([ball]), disk_energy(R, beta, gamma),
                     G([]), empty_energy(R, alpha, frame.area))
    for name, reg in competitors(R, seed):
        if not check_region(reg, R).passed:
            raise AssertionError(f"competitor {name} is not in U_R")
        rep.competitors.append(Competitor(name, G([reg]), perimeter(reg)))
    rep.competitors.append(Competitor("empty", rep.G_empty, 0.0))
    rep.disk_wins = all(rep.G_disk < c.energy for c in rep.competitors)
    if optimize:
        _optimize(rep, img, params, truth, seed, iterations)
    return rep


def noisy_seed(img: RasterImage, R: float, seed: int) -> LayeredSegmentation:
    """One-layer seed found on a noisy copy of ``img``, then moved off target."""
    rng = np.random.default_rng(seed)
    noisy = RasterImage(np.clip(img.values + rng.normal(0.0, NOISE_SIGMA, img.values.shape), 0, 1),
                        img.grid)
    init = seed_segmentation(noisy, R, 1)
    if init.k == 0:
        raise PreconditionError("no seed region found in the noisy image")
    moved = init.layers[0].translated(SEED_SHIFT[0] * R, SEED_SHIFT[1] * R).scaled(SEED_SCALE)
    return init.replace([Region(resample_spline(moved.outer, R / 8))])


def _optimize(rep: BallReport, img, params, truth, seed, iterations):
    init = noisy_seed(img, params.R, seed)
    t = time.perf_counter()
    run = optimize_fixed_k(img, params, Schedule(iterations=iterations, seed=seed), 1, init=init)
    rep.optimizer_seconds = time.perf_counter() - t
    rep.optimized_energy = run.best_energy
    rep.optimized_gap = run.best_energy / rep.G_disk_analytic - 1
    rep.optimizer_feasible = run.feasible
    rep.hausdorff_px = (hausdorff_distance(run.final.layers, truth) / img.grid.pixel_size
                        if run.final.k else math.inf)
