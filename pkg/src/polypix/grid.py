"""Homogeneous pixel-coordinate grids.

A grid stores the 3 x (H*W) matrix whose columns are (x, y, 1) for every
pixel in raster order (y outer, x inner). Coordinates are computed with
the affine combination ``(min*(N-c) + max*c) / N`` evaluated in float64:
for dyadic region bounds the numerator is exact, so equal real-valued
coordinates produced by different grid sizes round to identical floats.
That is what makes nested dense grids and the 0.25-margin extrapolation
region contain the unit grid bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError

UNIT_REGION = (0.0, 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class CoordinateGrid:
    """Immutable coordinate matrix over an axis-aligned rectangle.

    ``region`` is (x_min, x_max, y_min, y_max) in normalized units;
    ``matrix`` has rows x, y, 1 and one column per pixel.
    """

    height: int
    width: int
    region: tuple[float, float, float, float]
    matrix: np.ndarray = field(repr=False)

    @property
    def pixels(self) -> int:
        return self.height * self.width


def pixel_index(row: int, col: int, width: int) -> int:
    return row * width + col


def pixel_rowcol(index: int, width: int) -> tuple[int, int]:
    return index // width, index % width


def _axis_coords(count: int, lo: float, hi: float) -> np.ndarray:
    if count == 1:
        return np.full(1, lo, dtype=np.float64)
    n = count - 1
    c = np.arange(count, dtype=np.float64)
    return (lo * (n - c) + hi * c) / n


def make_grid(height: int, width: int, region=UNIT_REGION, dtype=np.float32) -> CoordinateGrid:
    """Build an H x W grid over ``region``; a size-1 axis sits at the region minimum."""
    height, width = int(height), int(width)
    if height < 1 or width < 1:
        raise ArgumentError(f"make_grid: dimensions must be >= 1, got {height}x{width}")
    x_min, x_max, y_min, y_max = (float(v) for v in region)
    if x_min > x_max or y_min > y_max:
        raise ArgumentError(f"make_grid: region bounds out of order: {region}")

    xs = _axis_coords(width, x_min, x_max)
    ys = _axis_coords(height, y_min, y_max)
    m = np.empty((3, height * width), dtype=np.float64)
    m[0] = np.tile(xs, height)
    m[1] = np.repeat(ys, width)
    m[2] = 1.0
    return CoordinateGrid(height, width, (x_min, x_max, y_min, y_max),
                          np.ascontiguousarray(m.astype(dtype)))


def nested_dense_grid(base_height: int, base_width: int, factor: int,
                      dtype=np.float32) -> CoordinateGrid:
    """Unit grid of size (f*(H-1)+1) x (f*(W-1)+1) containing the base grid.

    Every base coordinate c/(N) reappears at index f*c as (f*c)/(f*N):
    the same real quotient, hence the same float.
    """
    base_height, base_width = int(base_height), int(base_width)
    factor = int(factor)
    if factor < 1:
        raise ArgumentError(f"nested_dense_grid: factor must be >= 1, got {factor}")
    if base_height < 2 or base_width < 2:
        raise ArgumentError(
            f"nested_dense_grid: base dims must be >= 2, got {base_height}x{base_width}"
        )
    return make_grid(factor * (base_height - 1) + 1, factor * (base_width - 1) + 1,
                     UNIT_REGION, dtype=dtype)


def column_subset(grid: CoordinateGrid, indices) -> np.ndarray:
    """Copy of the grid matrix restricted to the given pixel columns."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise ArgumentError("column_subset: indices must be one-dimensional")
    if idx.size and (idx.min() < 0 or idx.max() >= grid.pixels):
        raise ArgumentError(f"column_subset: index out of range for {grid.pixels} pixels")
    return np.ascontiguousarray(grid.matrix[:, idx])
