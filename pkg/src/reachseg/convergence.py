"""Set metrics and finite sequence experiments around compactness and semicontinuity in U_R.

Kuratowski convergence of equibounded compact sets is measured through the
Hausdorff distance of boundaries; L1 convergence through the rasterized area
of the symmetric difference. Every generator family below has a closed-form
limit, so each experiment carries its own ground truth.

A finite sequence can never prove a liminf inequality; ``analyze_sequence``
reports consistency with lower semicontinuity, nothing more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .energy import PhiModel, curvature_energy
from .errors import PreconditionError
from .geometry import all_edges, area, as_regions, perimeter
from .raster import Grid, RasterImage, rasterize
from .shapes import disk, perturbed_disk
from .sphere import check_region, in_class

SAMPLES_PER_FEATURE = 16


def boundary_samples(regions, spacing: float) -> np.ndarray:
    """Points along every boundary edge, no two consecutive farther apart than ``spacing``."""
    a, b = all_edges(as_regions(regions))
    lens = np.hypot(*(b - a).T)
    counts = np.maximum(1, np.ceil(lens / spacing).astype(int))
    idx = np.repeat(np.arange(len(a)), counts)
    start = np.cumsum(counts) - counts
    t = (np.arange(counts.sum()) - np.repeat(start, counts)) / np.repeat(counts, counts)
    return a[idx] + t[:, None] * (b[idx] - a[idx])


def _feature_size(regions) -> float:
    # radius of the circle with the same perimeter as the smallest boundary curve
    return min(perimeter(c) for r in regions for c in r.curves) / (2 * math.pi)


def hausdorff_distance(A, B, spacing: float | None = None) -> float:
    """Symmetric Hausdorff distance between the boundaries of two region sets.

    Each boundary is sampled at ``spacing`` (default: smallest feature / 16,
    never coarser than the finest edge); distances from samples to the other
    boundary are exact point-to-segment distances.
    """
    A, B = as_regions(A), as_regions(B)
    if not A or not B:
        raise ValueError("Hausdorff distance needs two nonempty sets")
    if spacing is None:
        feature = min(_feature_size(A), _feature_size(B))
        spacing = feature / SAMPLES_PER_FEATURE
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    ea, eb = all_edges(A), all_edges(B)
    if len(ea[0]) == len(eb[0]) and np.array_equal(ea[0], eb[0]) and np.array_equal(ea[1], eb[1]):
        return 0.0
    d_ab = kernels.min_dist_to_segments(boundary_samples(A, spacing), *eb).max()
    d_ba = kernels.min_dist_to_segments(boundary_samples(B, spacing), *ea).max()
    return float(max(d_ab, d_ba))


def l1_distance(A, B, frame) -> float:
    """Area of the symmetric difference, counted on pixel centers of ``frame``.

    ``frame`` is a Grid or a RasterImage; parts of either set outside the frame
    are not seen.
    """
    grid = frame.grid if isinstance(frame, RasterImage) else frame
    ma = rasterize(as_regions(A), grid)
    mb = rasterize(as_regions(B), grid)
    return float(np.count_nonzero(ma ^ mb)) * grid.pixel_area


def functional(regions, phi: PhiModel) -> float:
    """``F(E) = sum over boundary curves of int phi(kappa) ds``."""
    return float(sum(curvature_energy(r, phi) for r in as_regions(regions)))


def _total_perimeter(regions) -> float:
    return float(sum(perimeter(r) for r in as_regions(regions)))


@dataclass
class SequenceReport:
    """Per-term metrics of a sequence against its limit, plus the derived verdicts."""

    hausdorff_to_limit: np.ndarray
    l1_to_limit: np.ndarray
    perimeter: np.ndarray
    F_value: np.ndarray
    limit_feasible: bool
    perimeter_converges: bool
    semicontinuity_ok: bool
    perimeter_limit: float = float("nan")
    F_limit: float = float("nan")
    settle_index: int = -1  # first index after which F(limit) <= F(term) + slack holds for good

    def __post_init__(self):
        n = len(self.perimeter)
        for name in ("hausdorff_to_limit", "l1_to_limit", "F_value"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, expected {n}")

    def table(self) -> str:
        """Comma-separated per-term metrics with a header row."""
        rows = ["index,hausdorff,l1,perimeter,F"]
        for i in range(len(self.perimeter)):
            rows.append(f"{i},{self.hausdorff_to_limit[i]!r},{self.l1_to_limit[i]!r},"
                        f"{self.perimeter[i]!r},{self.F_value[i]!r}")
        return "\n".join(rows) + "\n"


def _eventually_decreasing(dev: np.ndarray, rel: float) -> bool:
    """Non-increasing (up to ``rel``) over the second half of the sequence."""
    tail = dev[len(dev) // 2:]
    return bool(np.all(np.diff(tail) <= rel))


def analyze_sequence(seq, limit, R: float, phi: PhiModel, frame: Grid | None = None,
                     perimeter_tol: float = 0.01, lsc_slack: float = 0.02,
                     tol: float = 0.02) -> SequenceReport:
    """Metrics of ``seq`` (a list of region sets) against ``limit``.

    Every term must pass the ball test at ``R``; the first one that does not is
    reported by index. ``frame`` defaults to a grid at ``R / 32`` covering all
    sets with a margin of ``R``.
    """
    seq = [as_regions(s) for s in seq]
    limit = as_regions(limit)
    if not seq:
        raise ValueError("empty sequence")
    for i, term in enumerate(seq):
        if not in_class(term, R, tol):
            rep = check_region(term, R, tol)
            raise PreconditionError(f"term {i} is not in U_R (worst margin {rep.worst_violation:.4g})")
    if frame is None:
        everything = [r for s in seq for r in s] + list(limit)
        frame = Grid.covering(everything, R / 32, pad=R)
    haus = np.array([hausdorff_distance(s, limit) for s in seq])
    l1 = np.array([l1_distance(s, limit, frame) for s in seq])
    per = np.array([_total_perimeter(s) for s in seq])
    F = np.array([functional(s, phi) for s in seq])
    P_lim = _total_perimeter(limit)
    F_lim = functional(limit, phi)
    dev = np.abs(per - P_lim)
    converges = bool(dev[-1] <= perimeter_tol * P_lim and _eventually_decreasing(dev, 1e-9 * P_lim))
    quarter = max(1, len(seq) // 4)
    lsc_ok = bool(F_lim <= F[-quarter:].min() + lsc_slack * F_lim)
    holds = F_lim <= F + lsc_slack * F_lim
    bad = np.flatnonzero(~holds)
    settle = 0 if len(bad) == 0 else (int(bad[-1]) + 1 if bad[-1] + 1 < len(seq) else -1)
    return SequenceReport(haus, l1, per, F, in_class(limit, R, tol), converges, lsc_ok,
                          P_lim, F_lim, settle)


# ---------------------------------------------------------------- generator families

def radial_perturbation_family(R: float, terms: int = 12, spacing: float | None = None,
                               frequency: int = 6):
    """Circle of radius 3R with radial wave ``R / (10 h) cos(6 theta)``, h = 1..terms."""
    spacing = spacing if spacing is not None else R / 16
    rho = 3 * R
    seq = [[perturbed_disk(rho, R / (10 * h), frequency, spacing)] for h in range(1, terms + 1)]
    return seq, [disk(rho, spacing=spacing)]


def translation_family(R: float, terms: int = 12, spacing: float | None = None):
    """Disk of radius 2R centered at ``(R / h, 0)``; limit centered at the origin."""
    spacing = spacing if spacing is not None else R / 16
    seq = [[disk(2 * R, (R / h, 0.0), spacing=spacing)] for h in range(1, terms + 1)]
    return seq, [disk(2 * R, spacing=spacing)]


def radius_family(R: float, terms: int = 12, spacing: float | None = None, power: int = 2):
    """Disk of radius ``R (1 + h^-power)``; limit the disk of radius R.

    The default quadratic decay brings the 12th perimeter within 1% of the
    limit; ``power=1`` gives the slower ``R + R/h`` sequence.
    """
    spacing = spacing if spacing is not None else R / 16
    seq = [[disk(R * (1 + h ** -float(power)), spacing=spacing)] for h in range(1, terms + 1)]
    return seq, [disk(R, spacing=spacing)]


FAMILIES = {
    "radial": radial_perturbation_family,
    "translation": translation_family,
    "radius": radius_family,
}


# ---------------------------------------------------------------- equivalence probe

@dataclass
class EquivalenceReport:
    """Paired L1 / Hausdorff distances and how they shrink together inside U_R."""

    l1: np.ndarray
    hausdorff: np.ndarray
    in_class: np.ndarray  # both members of the pair pass the ball test
    deciles: list = field(default_factory=list)  # (l1 threshold, max hausdorff among U_R pairs below it)
    counterexample: tuple | None = None  # (l1, hausdorff) of the pair outside U_R

    def table(self) -> str:
        rows = ["l1_threshold,max_hausdorff"]
        rows += [f"{q!r},{h!r}" for q, h in self.deciles]
        return "\n".join(rows) + "\n"


def counterexample_pair(R: float, spacing: float | None = None):
    """A disk of radius 3R, and the same disk plus a far-away disk of radius R/4.

    The second set is outside U_R; its L1 distance to the first is tiny while
    their Hausdorff distance is large.
    """
    spacing = spacing if spacing is not None else R / 32
    big = disk(3 * R, spacing=spacing)
    speck = disk(R / 4, (9 * R, 0.0), spacing=spacing)
    return [big], [big, speck]


def equivalence_probe(pairs, R: float, frame: Grid | None = None, tol: float = 0.02,
                      include_counterexample: bool = True) -> EquivalenceReport:
    """L1 and Hausdorff distance for every pair; deciles of max Hausdorff by L1 level."""
    pairs = [(as_regions(a), as_regions(b)) for a, b in pairs]
    cx = counterexample_pair(R) if include_counterexample else None
    everything = [r for a, b in pairs for r in a + b] + ([r for s in cx for r in s] if cx else [])
    if frame is None:
        if not everything:
            raise ValueError("no pairs to probe")
        frame = Grid.covering(everything, R / 32, pad=R)
    l1 = np.array([l1_distance(a, b, frame) for a, b in pairs])
    haus = np.array([hausdorff_distance(a, b) for a, b in pairs])
    ok = np.array([in_class(a, R, tol) and in_class(b, R, tol) for a, b in pairs], dtype=bool)
    deciles = []
    if ok.any():
        for q in np.quantile(l1[ok], np.linspace(0.1, 1.0, 10)):
            deciles.append((float(q), float(haus[ok & (l1 <= q)].max())))
    counter = None
    if cx is not None:
        counter = (l1_distance(cx[0], cx[1], frame), hausdorff_distance(cx[0], cx[1]))
    return EquivalenceReport(l1, haus, ok, deciles, counter)


def shifted_pairs(R: float, count: int = 20, spacing: float | None = None):
    """Disk of radius 2R against copies shifted by distances log-spaced in [0.01R, R]."""
    spacing = spacing if spacing is not None else R / 16
    base = disk(2 * R, spacing=spacing)
    out = []
    for t in np.geomspace(0.01, 1.0, count):
        out.append(([base], [base.translated(t * R, 0.5 * t * R)]))
    return out


def set_area(regions) -> float:
    return float(sum(area(r) for r in as_regions(regions)))


# ---------------------------------------------------------------- suites

SUITES = ("metrics", "semicontinuity", "compactness", "equivalence")


@dataclass
class SuiteResult:
    """Named pass/fail checks plus comma-separated raw metrics."""

    name: str
    checks: list = field(default_factory=list)  # (check name, passed, detail)
    raw: str = ""

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def to_text(self) -> str:
        lines = [f"suite {self.name}", "check,result,detail"]
        lines += [f"{n},{'PASS' if ok else 'FAIL'},{d}" for n, ok, d in self.checks]
        lines += ["", self.raw.rstrip("\n"), ""]
        return "\n".join(lines)


def verify_suite(name: str, R: float, phi: PhiModel | None = None) -> SuiteResult:
    """Run one of ``SUITES`` at radius ``R``."""
    phi = phi if phi is not None else PhiModel.power(2)
    if name == "metrics":
        return _suite_metrics(R)
    if name in ("semicontinuity", "compactness"):
        return _suite_families(name, R, phi)
    if name == "equivalence":
        return _suite_equivalence(R)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")


def _suite_metrics(R: float) -> SuiteResult:
    from .shapes import feasible_suite

    res = SuiteResult("metrics")
    shapes = [[s] for s in feasible_suite(R, count=8, seed=1)]
    n = len(shapes)
    frame = Grid.covering([r for s in shapes for r in s], R / 16, pad=R)
    D = np.array([[hausdorff_distance(a, b) if i != j else 0.0 for j, b in enumerate(shapes)]
                  for i, a in enumerate(shapes)])
    sym = float(np.abs(D - D.T).max())
    tri = max(D[i, k] - D[i, j] - D[j, k] for i in range(n) for j in range(n) for k in range(n))
    self_d = max(hausdorff_distance(s, s) for s in shapes)
    res.checks.append(("hausdorff_symmetric", sym <= 1e-12, f"max asymmetry {sym:.3g}"))
    res.checks.append(("hausdorff_triangle", tri <= 1e-9, f"max excess {tri:.3g}"))
    res.checks.append(("hausdorff_zero_on_equal", self_d == 0.0, f"{self_d:.3g}"))
    worst = max(l1_distance(a, b, frame) - set_area(a) - set_area(b)
                for a in shapes for b in shapes)
    res.checks.append(("l1_below_area_sum", worst <= 0, f"max excess {worst:.3g}"))
    c1, c2 = disk(R, spacing=R / 64), disk(1.1 * R, spacing=R / 64)
    h = hausdorff_distance(c1, c2)
    res.checks.append(("concentric_circles", abs(h - 0.1 * R) <= 1e-3 * max(1.0, R),
                       f"{h:.6g} vs {0.1 * R:.6g}"))
    res.raw = "i,j,hausdorff\n" + "".join(f"{i},{j},{D[i, j]!r}\n"
                                          for i in range(n) for j in range(n))
    return res


def _suite_families(name: str, R: float, phi: PhiModel) -> SuiteResult:
    res = SuiteResult(name)
    raw = []
    for fam, gen in FAMILIES.items():
        seq, lim = gen(R)
        rep = analyze_sequence(seq, lim, R, phi)
        if name == "semicontinuity":
            res.checks.append((f"{fam}_lsc_consistent", rep.semicontinuity_ok,
                               f"F(limit) {rep.F_limit:.6g}, min tail F {rep.F_value[-3:].min():.6g}"))
        else:
            res.checks.append((f"{fam}_limit_in_class", rep.limit_feasible, ""))
            res.checks.append((f"{fam}_perimeter_converges", rep.perimeter_converges,
                               f"last {rep.perimeter[-1]:.6g} vs {rep.perimeter_limit:.6g}"))
            shrink = rep.hausdorff_to_limit[-1] < rep.hausdorff_to_limit[0] \
                and rep.l1_to_limit[-1] <= rep.l1_to_limit[0]
            res.checks.append((f"{fam}_distances_shrink", bool(shrink),
                               f"hausdorff {rep.hausdorff_to_limit[-1]:.3g}, "
                               f"l1 {rep.l1_to_limit[-1]:.3g}"))
        raw.append(f"family {fam}\n" + rep.table())
    res.raw = "\n".join(raw)
    return res


def _suite_equivalence(R: float) -> SuiteResult:
    res = SuiteResult("equivalence")
    rep = equivalence_probe(shifted_pairs(R), R)
    hs = [h for _, h in rep.deciles]
    res.checks.append(("pairs_in_class", bool(rep.in_class.all()), f"{int(rep.in_class.sum())} pairs"))
    res.checks.append(("shrink_together", bool(np.all(np.diff(hs) >= -1e-12)),
                       f"max hausdorff by l1 decile {hs[0]:.3g} .. {hs[-1]:.3g}"))
    big, small = counterexample_pair(R)
    l1, h = rep.counterexample
    res.checks.append(("counterexample_outside_class", not in_class(small, R), ""))
    res.checks.append(("counterexample_l1_small", l1 <= 0.01 * set_area(big), f"{l1:.4g}"))
    res.checks.append(("counterexample_hausdorff_large", h >= R, f"{h:.4g}"))
    res.raw = "l1,hausdorff\n" + "".join(f"{a!r},{b!r}\n" for a, b in zip(rep.l1, rep.hausdorff)) \
        + "\n" + rep.table()
    return res
