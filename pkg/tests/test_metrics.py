import numpy as np
import pytest

from polypix.errors import ArgumentError
from polypix.image import ImageBuffer
from polypix.metrics import psnr, ssim


def const_image(value, shape=(8, 8)):
    return ImageBuffer(np.full((*shape, 3), value, dtype=np.float64))


def test_psnr_identity_caps_at_99():
    a = const_image(0.3)
    assert psnr(a, a) == 99.0


def test_psnr_offset_is_20db():
    # raw offset 0.2 is 0.1 on the [0,1] export scale: MSE 0.01 -> 20 dB
    rng = np.random.default_rng(0)
    raw = rng.uniform(-0.8, 0.6, (16, 16, 3))
    a = ImageBuffer(raw)
    b = ImageBuffer(raw + 0.2)
    assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)


def test_psnr_symmetry():
    rng = np.random.default_rng(1)
    a = ImageBuffer(rng.uniform(-1, 1, (6, 6, 3)))
    b = ImageBuffer(rng.uniform(-1, 1, (6, 6, 3)))
    assert psnr(a, b) == psnr(b, a)


def test_psnr_decreases_with_noise_amplitude():
    rng = np.random.default_rng(2)
    base = rng.uniform(-0.5, 0.5, (12, 12, 3))
    noise = rng.standard_normal(base.shape)
    values = [psnr(ImageBuffer(base), ImageBuffer(base + amp * noise))
              for amp in (0.01, 0.05, 0.2, 0.5)]
    assert values == sorted(values, reverse=True)
    assert len(set(values)) == len(values)


def test_psnr_shape_mismatch():
    with pytest.raises(ArgumentError):
        psnr(const_image(0.0, (4, 4)), const_image(0.0, (4, 5)))


def test_ssim_identity():
    rng = np.random.default_rng(3)
    a = ImageBuffer(rng.uniform(-1, 1, (10, 10, 3)))
    assert ssim(a, a) == pytest.approx(1.0)


def test_ssim_constant_pair_hand_value():
    # means 0.3 and 0.7 on the unit scale; variances vanish:
    # (2*0.21 + 1e-4) / (0.09 + 0.49 + 1e-4) = 0.4201 / 0.5801
    a = const_image(-0.4)
    b = const_image(0.4)
    assert ssim(a, b) == pytest.approx(0.4201 / 0.5801, abs=1e-12)
    assert ssim(a, b) == pytest.approx(0.7242, abs=5e-4)


def test_ssim_symmetry_and_bound():
    rng = np.random.default_rng(4)
    for _ in range(10):
        a = ImageBuffer(rng.uniform(-1, 1, (7, 9, 3)))
        b = ImageBuffer(rng.uniform(-1, 1, (7, 9, 3)))
        s = ssim(a, b)
        assert s == ssim(b, a)
        assert s <= 1.0


def test_ssim_shape_mismatch():
    with pytest.raises(ArgumentError):
        ssim(const_image(0.0, (4, 4)), const_image(0.0, (5, 4)))
