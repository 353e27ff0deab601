"""Pixel grids, grayscale images and pixel-center rasterization of regions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import Region, as_regions


@dataclass(frozen=True)
class Grid:
    """Rectangular pixel grid; ``origin`` is the lower-left corner of pixel (0, 0).

    Pixel ``(row, col)`` covers ``[x0 + col h, x0 + (col+1) h] x [y0 + row h, ...]``.
    """

    width: int
    height: int
    pixel_size: float = 1.0
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid must be at least 1x1")
        if not self.pixel_size > 0:
            raise ValueError("pixel_size must be positive")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def square(cls, half_width: float, n: int) -> Grid:
        """``n x n`` grid covering ``[-half_width, half_width]^2``."""
        return cls(n, n, 2 * half_width / n, (-half_width, -half_width))

    @classmethod
    def covering(cls, regions, pixel_size: float, pad: float = 0.0) -> Grid:
        regions = as_regions(regions)
        v = np.concatenate([r.outer.vertices for r in regions])
        lo = v.min(axis=0) - pad
        hi = v.max(axis=0) + pad
        w = max(1, math.ceil((hi[0] - lo[0]) / pixel_size))
        h = max(1, math.ceil((hi[1] - lo[1]) / pixel_size))
        return cls(w, h, pixel_size, (lo[0], lo[1]))

    @property
    def shape(self) -> tuple:
        return self.height, self.width

    @property
    def pixel_area(self) -> float:
        return self.pixel_size ** 2

    @property
    def area(self) -> float:
        return self.width * self.height * self.pixel_area

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-center coordinates ``(X, Y)`` with shape ``(height, width)``."""
        h = self.pixel_size
        xs = self.origin[0] + (np.arange(self.width) + 0.5) * h
        ys = self.origin[1] + (np.arange(self.height) + 0.5) * h
        return np.meshgrid(xs, ys)

    def pixel_of(self, x: float, y: float) -> tuple[int, int]:
        h = self.pixel_size
        return int((y - self.origin[1]) // h), int((x - self.origin[0]) // h)

    def center_of(self, row: int, col: int) -> tuple[float, float]:
        h = self.pixel_size
        return self.origin[0] + (col + 0.5) * h, self.origin[1] + (row + 0.5) * h


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Grayscale data ``values[row, col]`` in [0, 1] on a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_array(cls, values, pixel_size: float = 1.0, origin=(0.0, 0.0)) -> RasterImage:
        v = np.asarray(values, dtype=np.float64)
        return cls(v, Grid(v.shape[1], v.shape[0], pixel_size, origin))

    @classmethod
    def indicator(cls, regions, grid: Grid) -> RasterImage:
        """Characteristic function of a set, sampled at pixel centers."""
        return cls(rasterize(regions, grid).astype(np.float64), grid)

    @property
    def width(self) -> int:
        return self.grid.width

    @property
    def height(self) -> int:
        return self.grid.height

    @property
    def pixel_size(self) -> float:
        return self.grid.pixel_size

    @property
    def origin(self) -> tuple:
        return self.grid.origin


def rasterize(regions, grid: Grid) -> np.ndarray:
    """Pixels of ``grid`` whose centers lie in the union of ``regions``.

    Each region is filled even-odd (holes excluded) over its bounding rows and
    columns only.
    """
    out = np.zeros(grid.shape, dtype=bool)
    for region in as_regions(regions):
        sub = _raster_window(region, grid)
        if sub is not None:
            (r0, r1, c0, c1), m = sub
            out[r0:r1, c0:c1] |= m
    return out


def _raster_window(region: Region, grid: Grid):
    h = grid.pixel_size
    x0, y0, x1, y1 = region.bbox()
    c0 = max(0, math.floor((x0 - grid.origin[0]) / h - 0.5))
    c1 = min(grid.width, math.ceil((x1 - grid.origin[0]) / h + 0.5))
    r0 = max(0, math.floor((y0 - grid.origin[1]) / h - 0.5))
    r1 = min(grid.height, math.ceil((y1 - grid.origin[1]) / h + 0.5))
    if c1 <= c0 or r1 <= r0:
        return None
    a, b = region.edges()
    m = kernels.scanline_fill(a, b, grid.origin[0] + c0 * h, grid.origin[1] + r0 * h, h,
                              c1 - c0, r1 - r0)
    return (r0, r1, c0, c1), m
