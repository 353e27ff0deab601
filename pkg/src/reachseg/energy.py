"""Curvature energies and the layered (overlapping-region) segmentation functional.

For layers ``E_1, ..., E_k`` in depth order (1 = front) and image ``g``:

    G_k = alpha * sum_i fid(E'_i) + alpha * fid(background)
          + sum_i (beta * |E_i| + gamma * int_{dE_i} phi(kappa) ds)

where ``E'_i = E_i minus E_1..E_{i-1}`` is the visible part of layer ``i`` and
``fid(A) = int_A |g - mean_A g|^2``. Area and curvature terms use the whole
layer, unclipped and including hidden boundary arcs; fidelity only sees the
pixels of the image frame.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import PreconditionError
from .geometry import Region, area, curvature_profile, perimeter
from .raster import Grid, RasterImage, rasterize


@dataclass(frozen=True)
class PhiModel:
    """Convex-in-spirit curvature density ``phi(kappa)``.

    kinds:
      ``power``     ``1 + |k|^p``, p >= 1
      ``nm``        ``nu + a k^2`` for ``|k| < b/a``, else ``nu + b |k|``
      ``quadratic`` ``c0 + c2 k^2``
    """

    kind: str
    params: tuple

    def __post_init__(self):
        p = tuple(float(x) for x in self.params)
        object.__setattr__(self, "params", p)
        if self.kind == "power":
            if len(p) != 1 or p[0] < 1:
                raise ValueError("power model needs a single exponent p >= 1")
        elif self.kind == "nm":
            if len(p) != 3 or min(p) <= 0:
                raise ValueError("nm model needs nu, a, b > 0")
        elif self.kind == "quadratic":
            if len(p) != 2 or p[1] < 0:
                raise ValueError("quadratic model needs c0 and c2 >= 0")
        else:
            raise ValueError(f"unknown phi model {self.kind!r}")

    @classmethod
    def power(cls, p: float = 2.0) -> PhiModel:
        return cls("power", (p,))

    @classmethod
    def nitzberg_mumford(cls, nu: float, a: float, b: float) -> PhiModel:
        return cls("nm", (nu, a, b))

    @classmethod
    def quadratic(cls, c0: float, c2: float) -> PhiModel:
        return cls("quadratic", (c0, c2))

    @classmethod
    def parse(cls, text: str) -> PhiModel:
        """``power:P``, ``nm:NU,A,B`` or ``quadratic:C0,C2``."""
        kind, _, rest = text.partition(":")
        kind = {"quad": "quadratic"}.get(kind.strip(), kind.strip())
        try:
            vals = tuple(float(x) for x in rest.split(",")) if rest else ()
        except ValueError:
            raise ValueError(f"cannot parse phi model {text!r}") from None
        return cls(kind, vals)

    def __str__(self):
        return f"{self.kind}:" + ",".join(f"{x:g}" for x in self.params)

    def __call__(self, kappa):
        k = np.abs(np.asarray(kappa, dtype=np.float64))
        if self.kind == "power":
            return 1.0 + k ** self.params[0]
        if self.kind == "nm":
            nu, a, b = self.params
            return np.where(k < b / a, nu + a * k * k, nu + b * k)
        c0, c2 = self.params
        return c0 + c2 * k * k

    def envelope(self, kappa):
        """Largest convex minorant of ``phi``.

        Equal to ``phi`` except for the nm model, whose quadratic and linear
        branches meet with a downward kink at ``b/a``; its envelope follows the
        quadratic up to ``b/2a`` and the tangent line of slope ``b`` after it.
        """
        if self.kind != "nm":
            return self(kappa)
        nu, a, b = self.params
        k = np.abs(np.asarray(kappa, dtype=np.float64))
        return np.where(k < b / (2 * a), nu + a * k * k, nu - b * b / (4 * a) + b * k)


def phi_eval(phi: PhiModel, kappa: float) -> float:
    return float(phi(kappa))


@dataclass(frozen=True)
class EnergyParams:
    alpha: float
    beta: float
    gamma: float
    R: float
    phi: PhiModel = field(default_factory=PhiModel.power)

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "R"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True, eq=False)
class LayeredSegmentation:
    """Depth-ordered layers; index 0 is the frontmost."""

    layers: tuple = ()
    grid: Grid | None = None

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def k(self) -> int:
        return len(self.layers)

    def replace(self, layers) -> LayeredSegmentation:
        return LayeredSegmentation(tuple(layers), self.grid)


def curvature_energy(curve, phi: PhiModel) -> float:
    """``sum_i phi(kappa_i) w_i`` over every boundary curve given."""
    if isinstance(curve, Region):
        return sum(curvature_energy(c, phi) for c in curve.curves)
    kappa, w = curvature_profile(curve)
    return float(np.dot(phi(kappa), w))


def overlap_decompose(seg: LayeredSegmentation, img) -> tuple[list, np.ndarray]:
    """Visible-part masks ``E'_i`` and the background, partitioning the frame."""
    grid = img.grid if isinstance(img, RasterImage) else img
    masks = [rasterize(layer, grid) for layer in seg.layers]
    return visible_parts(masks, grid.shape)


def visible_parts(layer_masks, shape) -> tuple[list, np.ndarray]:
    covered = np.zeros(shape, dtype=bool)
    out = []
    for m in layer_masks:
        out.append(m & ~covered)
        covered |= m
    return out, ~covered


def region_mean(img: RasterImage, mask) -> float:
    """Mean of ``g`` over the mask; 0 for an empty mask."""
    vals = img.values[np.asarray(mask, dtype=bool)]
    return float(vals.mean()) if vals.size else 0.0


def fidelity_from_sums(s1: float, s2: float, n: int, pixel_area: float) -> float:
    """``sum (g - mean)^2 * pixel_area`` from ``sum g``, ``sum g^2`` and the count."""
    if n == 0:
        return 0.0
    return max(0.0, s2 - s1 * s1 / n) * pixel_area


def fidelity(img: RasterImage, mask) -> float:
    vals = img.values[np.asarray(mask, dtype=bool)]
    if vals.size == 0:
        return 0.0
    return float(((vals - vals.mean()) ** 2).sum()) * img.grid.pixel_area


@dataclass
class EnergyBreakdown:
    """Weighted terms of G_k; ``G`` is their sum.

    ``fidelity_per_layer`` and ``fidelity_background`` already include alpha,
    ``area_terms`` include beta and ``curvature_terms`` include gamma.
    """

    G: float
    fidelity_per_layer: list
    fidelity_background: float
    area_terms: list
    curvature_terms: list
    feasible: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def layer_feasible(layer: Region, R: float, tol: float = 0.02) -> bool:
    from .sphere import check_region
    try:
        return check_region(layer, R, tol).passed
    except PreconditionError:
        return False


def total_energy(seg: LayeredSegmentation, img: RasterImage, params: EnergyParams,
                 check: bool = True) -> EnergyBreakdown:
    """Evaluate G_k; ``feasible`` reports whether every layer is in U_R."""
    if seg.grid is not None and seg.grid != img.grid:
        raise ValueError(f"segmentation frame {seg.grid} does not match image frame {img.grid}")
    masks, bg = overlap_decompose(seg, img)
    fid = [params.alpha * fidelity(img, m) for m in masks]
    fid_bg = params.alpha * fidelity(img, bg)
    areas = [params.beta * area(layer) for layer in seg.layers]
    curv = [params.gamma * curvature_energy(layer, params.phi) for layer in seg.layers]
    G = float(math.fsum(fid) + fid_bg + math.fsum(areas) + math.fsum(curv))
    feasible = all(layer_feasible(layer, params.R) for layer in seg.layers) if check else True
    return EnergyBreakdown(G, fid, fid_bg, areas, curv, feasible)


def jensen_lower_bound(curve, phi: PhiModel) -> float:
    """``L * phi**(2 pi / L)`` with ``phi**`` the convex envelope of phi.

    Lower bound on ``int phi(kappa) ds`` over any closed curve of length L
    whose total absolute curvature is at least 2 pi and ``phi**`` is
    nondecreasing in ``|kappa|``. For ``power(2)`` it reads ``L + 4 pi^2 / L``.
    """
    if isinstance(curve, Region):
        curve = curve.outer
    L = perimeter(curve)
    return float(L * phi.envelope(2 * math.pi / L))


def k_upper_bound(current_G: float, params: EnergyParams) -> int:
    """Most nonempty layers a state with energy <= ``current_G`` can have.

    Each layer contains a radius-R ball, so it pays at least ``beta pi R^2``.
    """
    if current_G < 0:
        raise ValueError("energy must be non-negative")
    return math.floor(current_G / (params.beta * math.pi * params.R ** 2))

