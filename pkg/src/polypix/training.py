"""Desk-scale optimization: Adam, single-image fitting, and a small
adversarial loop with a progressive resolution schedule.

The generator architecture never changes across stages; all parameters
carry over and a fresh discriminator is built per resolution. Losses
are the non-saturating logistic pair (softplus forms) with an R1
gradient penalty on real images every ``r1_interval`` discriminator
steps. Runs are bit-reproducible for a fixed seed: every random draw
comes from seeded generators consumed in a fixed order.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

import numpy as np

from . import tensor as tz
from .errors import ArgumentError, TrainingError
from .generator import (
    Generator,
    GeneratorConfig,
    _affine_heads_t,
    _mapping_t,
    _synthesis_t,
    init_generator,
)
from .grid import make_grid
from .image import ImageBuffer, area_resize, load_image
from .tensor import Tensor

ADAM_BETA1 = 0.0
ADAM_BETA2 = 0.99
ADAM_EPS = 1e-8
DEFAULT_GENERATOR_LR = 1e-4
DEFAULT_DISCRIMINATOR_LR = 2e-4
R1_INTERVAL = 8
R1_GAMMA = 1.0


@dataclass
class AdamState:
    """Per-parameter moment buffers plus the shared step counter."""

    lr: float
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_update(state: AdamState, params: dict[str, Tensor],
                grads: dict[str, np.ndarray]) -> dict[str, Tensor]:
    """One Adam step; bias correction uses the incremented step count.

    Moments are kept in float64 so squared float32 gradients cannot
    overflow before the divergence check sees them.
    """
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t
    for name, p in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if not np.isfinite(g).all():
            raise TrainingError(f"non-finite gradient for parameter {name!r}")
        m = state.m.get(name)
        if m is None:
            m = np.zeros(p.data.shape, np.float64)
            state.m[name] = m
            state.v[name] = np.zeros(p.data.shape, np.float64)
        v = state.v[name]
        m[...] = state.beta1 * m + (1.0 - state.beta1) * g
        v[...] = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        update = (state.lr / c1) * m / (np.sqrt(v / c2) + state.eps)
        p.data = p.data - update.astype(p.dtype)
    return params


# ---------------------------------------------------------------------------
# discriminator

@dataclass
class Discriminator:
    """Three linear layers over a flattened image, scalar logit out."""

    resolution: int
    hidden_dim: int
    leaky_slope: float
    params: dict[str, Tensor]

    @property
    def input_dim(self) -> int:
        return 3 * self.resolution * self.resolution


def init_discriminator(resolution: int, seed, hidden_dim: int = 128,
                       leaky_slope: float = 0.2) -> Discriminator:
    resolution = int(resolution)
    if resolution < 1:
        raise ArgumentError(f"init_discriminator: bad resolution {resolution}")
    rng = np.random.default_rng(seed)
    d = 3 * resolution * resolution
    dims = [(hidden_dim, d), (hidden_dim, hidden_dim), (1, hidden_dim)]
    params: dict[str, Tensor] = {}
    for i, (out_d, in_d) in enumerate(dims):
        w = rng.standard_normal((out_d, in_d)) / np.sqrt(in_d)
        params[f"disc.{i}.weight"] = Tensor(w.astype(np.float32), requires_grad=True)
        params[f"disc.{i}.bias"] = Tensor(np.zeros((out_d, 1), np.float32), requires_grad=True)
    return Discriminator(resolution, hidden_dim, leaky_slope, params)


def _disc_logits_t(disc: Discriminator, x: Tensor) -> Tensor:
    """Logits (1, B) for a batch of flattened images (d, B)."""
    if x.data.ndim != 2 or x.shape[0] != disc.input_dim:
        raise ArgumentError(
            f"discriminator: input rows {x.shape} do not match resolution "
            f"{disc.resolution} (expected {disc.input_dim})"
        )
    h = x
    for i in range(3):
        h = tz.add_bias(tz.matmul(disc.params[f"disc.{i}.weight"], h),
                        disc.params[f"disc.{i}.bias"])
        if i < 2:
            h = tz.leaky_relu(h, disc.leaky_slope)
    return h


def flatten_image(img: ImageBuffer) -> np.ndarray:
    return np.ascontiguousarray(img.values.reshape(-1, 1), dtype=np.float32)


def discriminator_forward(disc: Discriminator, image: ImageBuffer) -> float:
    if (image.height, image.width) != (disc.resolution, disc.resolution):
        raise ArgumentError(
            f"discriminator_forward: image {image.height}x{image.width} does not "
            f"match discriminator resolution {disc.resolution}"
        )
    with tz.no_grad():
        logit = _disc_logits_t(disc, Tensor(flatten_image(image)))
    return float(logit.data[0, 0])


def r1_penalty_t(disc: Discriminator, x_real: Tensor) -> Tensor:
    """Mean squared input-gradient norm of the logits over the batch.

    ``x_real`` must be a requires-grad leaf; the result stays
    differentiable with respect to the discriminator weights.
    """
    logits = _disc_logits_t(disc, x_real)
    (gx,) = tz.grad(tz.total(logits), [x_real], create_graph=True)
    batch = x_real.shape[1]
    return tz.scale(tz.total(tz.mul(gx, gx)), 1.0 / batch)


# ---------------------------------------------------------------------------
# single-image fitting

def _render_from_z_t(gen: Generator, z: Tensor, class_id: int | None,
                     coords: Tensor) -> Tensor:
    w = _mapping_t(gen, z, class_id)
    affine = _affine_heads_t(gen, w)
    out, _ = _synthesis_t(gen, affine, coords)
    return out


def fit_latent(config: GeneratorConfig, seed: int) -> np.ndarray:
    """The latent vector ``fit_single_image`` conditions on for a seed."""
    return np.random.default_rng([int(seed), 1]).standard_normal(config.z_dim)


def fit_single_image(config: GeneratorConfig, target: ImageBuffer, steps: int,
                     lr: float, seed: int,
                     class_id: int | None = None) -> tuple[Generator, list[float]]:
    """Fit every generator parameter to one image with MSE on the unit grid.

    The learning rate follows a cosine decay from ``lr`` to zero, which
    settles Adam's dither near the optimum. Returns the best-loss
    snapshot and the loss history; the final entry is the returned
    generator's loss, so it never exceeds the first.
    """
    if target.height < 2 or target.width < 2:
        raise ArgumentError("fit_single_image: target must be at least 2x2")
    steps = int(steps)
    if steps < 1:
        raise ArgumentError(f"fit_single_image: steps must be >= 1, got {steps}")

    gen = init_generator(config, seed)
    z = Tensor(fit_latent(config, seed).reshape(-1, 1).astype(np.float32))
    coords = Tensor(make_grid(target.height, target.width).matrix)
    target_t = Tensor(target.to_matrix().astype(np.float32))

    base_lr = float(lr)
    state = AdamState(lr=base_lr)
    names = list(gen.params)
    history: list[float] = []
    best_loss = np.inf
    best: dict[str, np.ndarray] | None = None
    for step in range(steps):
        state.lr = base_lr * 0.5 * (1.0 + np.cos(np.pi * step / steps))
        out = _render_from_z_t(gen, z, class_id, coords)
        loss = tz.mse(out, target_t)
        value = loss.item()
        if not np.isfinite(value):
            raise TrainingError(f"fit_single_image: non-finite loss at step {step}")
        history.append(value)
        if value < best_loss:
            best_loss = value
            best = {k: gen.params[k].data.copy() for k in names}
        loss.backward()
        grads = {}
        for k in names:
            p = gen.params[k]
            grads[k] = p.grad if p.grad is not None else np.zeros_like(p.data)
            p.grad = None
        adam_update(state, gen.params, grads)

    with tz.no_grad():
        final = tz.mse(_render_from_z_t(gen, z, class_id, coords), target_t).item()
    if final < best_loss:
        best_loss, best = final, None
    if best is not None:
        for k in names:
            gen.params[k].data = best[k]
    history.append(best_loss)
    return gen, history


# ---------------------------------------------------------------------------
# adversarial training

@dataclass(frozen=True)
class Stage:
    resolution: int
    image_budget: int
    batch_size: int
    generator_lr: float = DEFAULT_GENERATOR_LR
    discriminator_lr: float = DEFAULT_DISCRIMINATOR_LR

    @property
    def steps(self) -> int:
        return max(1, self.image_budget // self.batch_size)


@dataclass(frozen=True)
class Schedule:
    stages: tuple[Stage, ...]

    def __post_init__(self):
        if not self.stages:
            raise ArgumentError("Schedule: at least one stage required")
        last = 0
        for s in self.stages:
            if s.resolution <= last:
                raise ArgumentError("Schedule: resolutions must be strictly increasing")
            if s.image_budget <= 0 or s.batch_size <= 0:
                raise ArgumentError("Schedule: budgets and batch sizes must be positive")
            if s.generator_lr <= 0 or s.discriminator_lr <= 0:
                raise ArgumentError("Schedule: learning rates must be positive")
            last = s.resolution


_SCHEDULE_RE = re.compile(r"^(\d+):(\d+)x(\d+)$")


def parse_schedule(text: str, generator_lr: float = DEFAULT_GENERATOR_LR,
                   discriminator_lr: float = DEFAULT_DISCRIMINATOR_LR) -> Schedule:
    """Parse ``"8:4000x8,16:2000x8"`` as resolution:image_budget x batch stages."""
    stages = []
    for part in text.split(","):
        m = _SCHEDULE_RE.match(part.strip())
        if not m:
            raise ArgumentError(
                f"schedule: bad stage {part!r}, expected RES:BUDGETxBATCH"
            )
        stages.append(Stage(int(m.group(1)), int(m.group(2)), int(m.group(3)),
                            generator_lr, discriminator_lr))
    return Schedule(tuple(stages))


@dataclass
class StageStats:
    resolution: int
    steps: int
    d_losses: list[float] = field(default_factory=list)
    g_losses: list[float] = field(default_factory=list)
    accuracies: list[float] = field(default_factory=list)


def _batch_columns_t(columns: list[Tensor]) -> Tensor:
    return tz.hstack(columns)


def _fake_column_t(gen: Generator, z: Tensor, class_id, coords: Tensor) -> Tensor:
    out = _render_from_z_t(gen, z, class_id, coords)  # (3, P)
    return tz.reshape(tz.transpose(out), (out.shape[1] * 3, 1))


def train_adversarial(gen_config: GeneratorConfig, dataset: list[ImageBuffer],
                      schedule: Schedule, seed: int,
                      r1_interval: int = R1_INTERVAL,
                      r1_gamma: float = R1_GAMMA,
                      hidden_dim: int = 128) -> tuple[Generator, list[StageStats]]:
    """Progressive adversarial training over the schedule's stages.

    The generator persists across stages unchanged in shape; each stage
    rebuilds the discriminator for its resolution and area-downsamples
    the real images. Returns the trained generator and per-stage traces.
    """
    if not dataset:
        raise ArgumentError("train_adversarial: dataset is empty")
    if gen_config.conditional:
        raise ArgumentError("train_adversarial: desk-scale loop is unconditional")
    gen = init_generator(gen_config, seed)
    g_state = AdamState(lr=schedule.stages[0].generator_lr)
    all_stats: list[StageStats] = []

    for si, stage in enumerate(schedule.stages):
        res = stage.resolution
        reals = np.stack([
            area_resize(img, res, res).values.reshape(-1).astype(np.float32)
            for img in dataset
        ])  # (N, d)
        disc = init_discriminator(res, [seed, 1000 + si], hidden_dim=hidden_dim)
        d_state = AdamState(lr=stage.discriminator_lr)
        g_state.lr = stage.generator_lr  # generator optimizer persists across stages
        rng = np.random.default_rng([seed, 2000 + si])
        coords = Tensor(make_grid(res, res).matrix)
        stats = StageStats(resolution=res, steps=stage.steps)
        g_names = list(gen.params)
        d_names = list(disc.params)

        for step in range(stage.steps):
            # discriminator update
            idx = rng.integers(0, reals.shape[0], size=stage.batch_size)
            x_real = Tensor(np.ascontiguousarray(reals[idx].T), requires_grad=True)
            z_d = rng.standard_normal((stage.batch_size, gen_config.z_dim)).astype(np.float32)
            with tz.no_grad():
                fake_cols = [_fake_column_t(gen, Tensor(z_d[b : b + 1].T), None, coords)
                             for b in range(stage.batch_size)]
                x_fake = _batch_columns_t(fake_cols)
            logits_real = _disc_logits_t(disc, x_real)
            logits_fake = _disc_logits_t(disc, x_fake)
            d_loss = tz.add(tz.mean(tz.softplus(tz.neg(logits_real))),
                            tz.mean(tz.softplus(logits_fake)))
            if r1_interval > 0 and step % r1_interval == 0:
                penalty = r1_penalty_t(disc, x_real)
                d_loss = tz.add(d_loss, tz.scale(penalty, 0.5 * r1_gamma))
            d_value = d_loss.item()
            if not np.isfinite(d_value):
                raise TrainingError(
                    f"train_adversarial: non-finite discriminator loss at "
                    f"stage {si} step {step}"
                )
            d_grads = tz.grad(d_loss, [disc.params[k] for k in d_names])
            adam_update(d_state, disc.params,
                        {k: g.data for k, g in zip(d_names, d_grads)})

            # generator update
            z_g = rng.standard_normal((stage.batch_size, gen_config.z_dim)).astype(np.float32)
            fake_cols = [_fake_column_t(gen, Tensor(z_g[b : b + 1].T), None, coords)
                         for b in range(stage.batch_size)]
            logits_g = _disc_logits_t(disc, _batch_columns_t(fake_cols))
            g_loss = tz.mean(tz.softplus(tz.neg(logits_g)))
            g_value = g_loss.item()
            if not np.isfinite(g_value):
                raise TrainingError(
                    f"train_adversarial: non-finite generator loss at "
                    f"stage {si} step {step}"
                )
            g_grads = tz.grad(g_loss, [gen.params[k] for k in g_names])
            adam_update(g_state, gen.params,
                        {k: g.data for k, g in zip(g_names, g_grads)})

            acc = 0.5 * (float(np.mean(logits_real.data > 0))
                         + float(np.mean(logits_fake.data < 0)))
            stats.d_losses.append(d_value)
            stats.g_losses.append(g_value)
            stats.accuracies.append(acc)
        all_stats.append(stats)
    return gen, all_stats


def load_image_dir(path: str) -> list[ImageBuffer]:
    """PNG files of a directory, sorted lexicographically by file name."""
    if not os.path.isdir(path):
        raise ArgumentError(f"load_image_dir: not a directory: {path}")
    names = sorted(n for n in os.listdir(path) if n.lower().endswith(".png"))
    if not names:
        raise ArgumentError(f"load_image_dir: no PNG files in {path}")
    return [load_image(os.path.join(path, n)) for n in names]
