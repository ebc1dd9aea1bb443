"""Image buffers and the PNG codec boundary.

Buffers hold float RGB values nominally in [-1, 1], raster-ordered like
the coordinate grid (y outer, x inner). PNG export quantizes with
``u = clamp(round((v+1)/2 * 255), 0, 255)`` using round-half-away-from-
zero; decoding inverts with ``v = 2u/255 - 1``. The 8-bit round trip is
stable: encode(decode(png)) reproduces the byte-identical pixel data.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import ArgumentError


@dataclass(frozen=True)
class ImageBuffer:
    """H x W x 3 float image, values nominally in [-1, 1]."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = self.values
        if v.ndim != 3 or v.shape[2] != 3:
            raise ArgumentError(f"ImageBuffer: expected (H, W, 3), got {v.shape}")
        if v.dtype not in (np.float32, np.float64):
            raise ArgumentError(f"ImageBuffer: expected float dtype, got {v.dtype}")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def to_matrix(self) -> np.ndarray:
        """Channels-by-pixels matrix (3, H*W) in raster order."""
        h, w, _ = self.values.shape
        return np.ascontiguousarray(self.values.reshape(h * w, 3).T)

    @staticmethod
    def from_matrix(matrix: np.ndarray, height: int, width: int) -> "ImageBuffer":
        if matrix.shape != (3, height * width):
            raise ArgumentError(
                f"from_matrix: expected (3, {height * width}), got {matrix.shape}"
            )
        return ImageBuffer(np.ascontiguousarray(matrix.T.reshape(height, width, 3)))


def quantize(values: np.ndarray) -> np.ndarray:
    """Map [-1, 1] floats to uint8 with round-half-away-from-zero."""
    t = (values.astype(np.float64) + 1.0) / 2.0 * 255.0
    r = np.where(t >= 0, np.floor(t + 0.5), np.ceil(t - 0.5))
    return np.clip(r, 0, 255).astype(np.uint8)


def dequantize(u: np.ndarray, dtype=np.float32) -> np.ndarray:
    return (2.0 * u.astype(np.float64) / 255.0 - 1.0).astype(dtype)


def atomic_write_bytes(path: str, payload: bytes) -> None:
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_png(img: ImageBuffer) -> bytes:
    """PNG bytes for an image buffer (8-bit RGB)."""
    if not np.isfinite(img.values).all():
        raise ArgumentError("encode_png: image contains non-finite values")
    import io

    pil = Image.fromarray(quantize(img.values), mode="RGB")
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def export_image(path: str, img: ImageBuffer) -> None:
    atomic_write_bytes(path, encode_png(img))


def decode_png(data: bytes, dtype=np.float32) -> ImageBuffer:
    import io

    with Image.open(io.BytesIO(data)) as pil:
        u = np.asarray(pil.convert("RGB"), dtype=np.uint8)
    return ImageBuffer(dequantize(u, dtype=dtype))


def load_image(path: str, dtype=np.float32) -> ImageBuffer:
    with open(path, "rb") as f:
        return decode_png(f.read(), dtype=dtype)


def _overlap_matrix(out_size: int, in_size: int) -> np.ndarray:
    # Row i weights input cells by their overlap with [i*s, (i+1)*s), s = in/out.
    s = in_size / out_size
    i = np.arange(out_size, dtype=np.float64)[:, None]
    j = np.arange(in_size, dtype=np.float64)[None, :]
    lo = np.maximum(i * s, j)
    hi = np.minimum((i + 1) * s, j + 1)
    return np.clip(hi - lo, 0.0, None) / s


def area_resize(img: ImageBuffer, height: int, width: int) -> ImageBuffer:
    """Box-average (area) resample to the requested size."""
    height, width = int(height), int(width)
    if height < 1 or width < 1:
        raise ArgumentError(f"area_resize: bad target size {height}x{width}")
    if (height, width) == (img.height, img.width):
        return ImageBuffer(img.values.copy())
    mh = _overlap_matrix(height, img.height)
    mw = _overlap_matrix(width, img.width)
    v = img.values.astype(np.float64)
    out = np.einsum("hH,HWc,wW->hwc", mh, v, mw, optimize=True)
    return ImageBuffer(out.astype(img.values.dtype))
