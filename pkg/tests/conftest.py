import numpy as np
import pytest

from polypix.generator import AffineParams, GeneratorConfig, init_generator, latent_to_affine
from polypix.image import ImageBuffer


def small_config(**overrides) -> GeneratorConfig:
    base = dict(z_dim=8, w_dim=16, levels=4, feature_dim=12)
    base.update(overrides)
    return GeneratorConfig(**base)


def random_affine(config: GeneratorConfig, seed: int) -> AffineParams:
    rng = np.random.default_rng(seed)
    return AffineParams(
        rng.standard_normal((config.levels, config.feature_dim, 3)).astype(np.float32)
    )


def sampled_affine(gen, seed: int, class_id: int | None = None) -> AffineParams:
    z = np.random.default_rng(seed).standard_normal(gen.config.z_dim)
    if class_id is None and gen.config.conditional:
        class_id = 0
    return latent_to_affine(gen, z, class_id)


def radial_target(size: int = 32) -> ImageBuffer:
    yy, xx = np.meshgrid(np.linspace(0, 1, size), np.linspace(0, 1, size), indexing="ij")
    r = np.sqrt((xx - 0.5) ** 2 + (yy - 0.5) ** 2)
    base = (1.0 - 2.0 * r).astype(np.float32)
    return ImageBuffer(
        np.stack([base, 0.8 * base, 0.5 + 0.5 * base], axis=2).astype(np.float32)
    )


def blob_dataset(count: int, size: int, seed: int) -> list[ImageBuffer]:
    rng = np.random.default_rng(seed)
    yy, xx = np.meshgrid(np.linspace(0, 1, size), np.linspace(0, 1, size), indexing="ij")
    images = []
    for _ in range(count):
        cx, cy = rng.uniform(0.25, 0.75, 2)
        s = rng.uniform(0.08, 0.2)
        bump = np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * s * s))
        color = rng.uniform(-0.8, 0.8, 3)
        img = np.tensordot(bump, color, axes=0) - 0.1
        images.append(ImageBuffer(np.clip(img, -1, 1).astype(np.float32)))
    return images


@pytest.fixture
def tiny_gen():
    return init_generator(small_config(), seed=3)
