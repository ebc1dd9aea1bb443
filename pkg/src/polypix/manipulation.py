"""Operations on a trained generator: interpolation, style mixing,
boundary extrapolation, dense-grid super-sampling, and per-level
heat-maps.

All functions are pure: they never touch generator weights and render
under the same per-pixel-independent path as ``synthesize``, so the
endpoint and containment identities hold bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ArgumentError
from .generator import (
    AffineParams,
    Generator,
    latent_to_affine,
    level_features,
    synthesize,
)
from .grid import CoordinateGrid, make_grid, nested_dense_grid
from .image import ImageBuffer


@dataclass(frozen=True)
class HeatMap:
    """Single-channel per-pixel weight map normalized to [0, 1]."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ArgumentError(f"HeatMap: expected (H, W), got {self.values.shape}")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def to_image(self) -> ImageBuffer:
        """Grayscale RGB buffer on [-1, 1] for PNG export."""
        v = (2.0 * self.values - 1.0).astype(np.float32)
        return ImageBuffer(np.repeat(v[:, :, None], 3, axis=2))


def _validate_levels(gen: Generator, levels: Iterable[int]) -> frozenset[int]:
    out = frozenset(int(i) for i in levels)
    for i in out:
        if not 0 <= i < gen.config.levels:
            raise ArgumentError(f"level {i} outside [0, {gen.config.levels})")
    return out


def lerp_affine(a: AffineParams, b: AffineParams, t: float) -> AffineParams:
    if a.matrices.shape != b.matrices.shape:
        raise ArgumentError(
            f"lerp_affine: shapes {a.matrices.shape} vs {b.matrices.shape}"
        )
    if t == 0.0:
        return AffineParams(a.matrices.copy())
    if t == 1.0:
        return AffineParams(b.matrices.copy())
    return AffineParams((1.0 - t) * a.matrices + t * b.matrices)


def interpolate(gen: Generator, end_a, end_b, t: float, space: str = "latent",
                class_id: int | None = None, height: int = 64,
                width: int = 64) -> ImageBuffer:
    """Render the point ``t`` of the way from ``end_a`` to ``end_b``.

    Latent mode takes z vectors and blends before the mapping network
    (one class for both endpoints); affine mode takes ``AffineParams``
    and blends each level's matrix. Endpoints reproduce the endpoint
    renders exactly.
    """
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ArgumentError(f"interpolate: t must be in [0, 1], got {t}")
    a_is_affine = isinstance(end_a, AffineParams)
    b_is_affine = isinstance(end_b, AffineParams)
    if a_is_affine != b_is_affine:
        raise ArgumentError("interpolate: endpoints mix latent and affine forms")
    if space not in ("latent", "affine"):
        raise ArgumentError(f"interpolate: unknown space {space!r}")

    grid = make_grid(height, width, dtype=gen.dtype)
    if space == "latent":
        if a_is_affine:
            raise ArgumentError("interpolate: latent space needs z vectors, got AffineParams")
        za = np.asarray(end_a, dtype=np.float64).reshape(-1)
        zb = np.asarray(end_b, dtype=np.float64).reshape(-1)
        if t == 0.0:
            z = za
        elif t == 1.0:
            z = zb
        else:
            z = (1.0 - t) * za + t * zb
        return synthesize(gen, latent_to_affine(gen, z, class_id), grid)
    if not a_is_affine:
        raise ArgumentError("interpolate: affine space needs AffineParams endpoints")
    return synthesize(gen, lerp_affine(end_a, end_b, t), grid)


def style_mix(gen: Generator, affine_a: AffineParams, affine_b: AffineParams,
              levels: Iterable[int], height: int = 64, width: int = 64) -> ImageBuffer:
    """Render B's affine parameters with A's substituted at the given levels."""
    mixed = mix_affine(gen, affine_a, affine_b, levels)
    return synthesize(gen, mixed, make_grid(height, width, dtype=gen.dtype))


def mix_affine(gen: Generator, affine_a: AffineParams, affine_b: AffineParams,
               levels: Iterable[int]) -> AffineParams:
    chosen = _validate_levels(gen, levels)
    if affine_a.matrices.shape != affine_b.matrices.shape:
        raise ArgumentError("mix_affine: endpoint shapes differ")
    m = affine_b.matrices.copy()
    for i in chosen:
        m[i] = affine_a.matrices[i]
    return AffineParams(m)


def extrapolate(gen: Generator, affine: AffineParams, margin: float,
                height: int, width: int) -> ImageBuffer:
    """Render on [-margin, 1+margin]^2; margin 0.25 gives the 1.5x region."""
    margin = float(margin)
    if margin < 0:
        raise ArgumentError(f"extrapolate: margin must be >= 0, got {margin}")
    region = (-margin, 1.0 + margin, -margin, 1.0 + margin)
    return synthesize(gen, affine, make_grid(height, width, region, dtype=gen.dtype))


def upsample_render(gen: Generator, affine: AffineParams, base_height: int,
                    base_width: int, factor: int, mode: str = "nested") -> ImageBuffer:
    """Dense-grid render above the base resolution.

    ``nested`` uses the (f*(H-1)+1)-sized grid that contains every base
    coordinate bit-exactly; ``standard`` renders a plain f*H x f*W grid.
    """
    factor = int(factor)
    if factor < 1:
        raise ArgumentError(f"upsample_render: factor must be >= 1, got {factor}")
    if mode == "nested":
        grid = nested_dense_grid(base_height, base_width, factor, dtype=gen.dtype)
    elif mode == "standard":
        grid = make_grid(factor * base_height, factor * base_width, dtype=gen.dtype)
    else:
        raise ArgumentError(f"upsample_render: unknown mode {mode!r}")
    return synthesize(gen, affine, grid)


def heatmap(gen: Generator, affine: AffineParams, grid: CoordinateGrid,
            level: int) -> HeatMap:
    """Channel-mean-weighted feature sum at one level, normalized to [0, 1].

    Per channel c the weight is the spatial mean of the feature; the raw
    map is the weighted channel sum per pixel. A flat raw map exports as
    all zeros.
    """
    feats = level_features(gen, affine, grid, level).astype(np.float64)  # (P, n)
    weights = feats.mean(axis=0)
    raw = feats @ weights
    lo, hi = float(raw.min()), float(raw.max())
    if hi == lo:
        norm = np.zeros_like(raw)
    else:
        norm = (raw - lo) / (hi - lo)
    return HeatMap(norm.reshape(grid.height, grid.width))
