"""Reconstruction quality scores.

Both metrics interpret buffer values on [0, 1] after the continuous
export mapping u = (v + 1) / 2 (no quantization, no clipping) and
compute in float64. SSIM uses a single global window with the standard
constants for unit dynamic range; there is no sliding Gaussian window.
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError
from .image import ImageBuffer

PSNR_CAP_DB = 99.0
SSIM_C1 = 1e-4
SSIM_C2 = 9e-4


def _unit_range(img: ImageBuffer) -> np.ndarray:
    return (img.values.astype(np.float64) + 1.0) / 2.0


def _check_shapes(op: str, a: ImageBuffer, b: ImageBuffer) -> None:
    if a.values.shape != b.values.shape:
        raise ArgumentError(f"{op}: shapes {a.values.shape} vs {b.values.shape}")


def psnr(a: ImageBuffer, b: ImageBuffer) -> float:
    """Peak signal-to-noise ratio in dB, capped at 99."""
    _check_shapes("psnr", a, b)
    diff = _unit_range(a) - _unit_range(b)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * np.log10(1.0 / mse))


def ssim(a: ImageBuffer, b: ImageBuffer) -> float:
    """Global-window structural similarity on channel-mean grayscale."""
    _check_shapes("ssim", a, b)
    ga = _unit_range(a).mean(axis=2)
    gb = _unit_range(b).mean(axis=2)
    mu_a, mu_b = ga.mean(), gb.mean()
    var_a = ((ga - mu_a) ** 2).mean()
    var_b = ((gb - mu_b) ** 2).mean()
    cov = ((ga - mu_a) * (gb - mu_b)).mean()
    num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_a**2 + mu_b**2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float(num / den)
