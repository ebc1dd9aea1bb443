"""Embedding images into affine-parameter space.

The synthesis weights stay frozen; only the per-level affine matrices
receive gradients. The reconstruction loss is pixel MSE, optionally
plus the MSE of horizontal and vertical forward differences, which
sharpens edges without any pretrained feature network.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import tensor as tz
from .errors import ArgumentError, TrainingError
from .generator import (
    AffineParams,
    Generator,
    _synthesis_t,
    affine_from_w,
    map_latent,
    synthesize,
)
from .grid import make_grid
from .image import ImageBuffer
from .metrics import psnr, ssim
from .tensor import Tensor
from .training import AdamState, adam_update

MEAN_AFFINE_DRAWS = 1000

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InversionConfig:
    steps: int = 1000
    lr: float = 0.02
    init: str = "mean-affine"
    init_seed: int = 0
    loss: str = "mse"
    log_every: int = 50

    def __post_init__(self):
        if self.steps < 0:
            raise ArgumentError(f"InversionConfig: steps must be >= 0, got {self.steps}")
        if self.lr <= 0:
            raise ArgumentError(f"InversionConfig: lr must be positive, got {self.lr}")
        if self.init not in ("mean-affine", "from-z"):
            raise ArgumentError(f"InversionConfig: unknown init {self.init!r}")
        if self.loss not in ("mse", "mse+grad"):
            raise ArgumentError(f"InversionConfig: unknown loss {self.loss!r}")


@dataclass
class InversionResult:
    affine: AffineParams
    loss_history: list[float]
    psnr: float
    ssim: float


def mean_affine(gen: Generator, seed: int = 0, draws: int = MEAN_AFFINE_DRAWS,
                class_id: int | None = None) -> AffineParams:
    """Affine parameters of the mean mapped vector over seeded latent draws.

    The affine heads are linear in w, so this equals the average of the
    per-draw affine parameters.
    """
    rng = np.random.default_rng([int(seed), 7])
    cfg = gen.config
    zs = rng.standard_normal((cfg.z_dim, draws))
    with tz.no_grad():
        if cfg.conditional:
            if class_id is None:
                raise ArgumentError("mean_affine: class_id required")
            emb = gen.params["class_embedding"].data[int(class_id)].reshape(-1, 1)
            x = np.vstack([zs, np.repeat(emb.astype(np.float64), draws, axis=1)])
        else:
            x = zs
        x = Tensor(x.astype(gen.dtype))
        h = tz.add_bias(tz.matmul(gen.params["mapping.0.weight"], x),
                        gen.params["mapping.0.bias"])
        h = tz.leaky_relu(h, cfg.leaky_slope)
        w = tz.add_bias(tz.matmul(gen.params["mapping.1.weight"], h),
                        gen.params["mapping.1.bias"])
    w_mean = w.data.mean(axis=1)
    return affine_from_w(gen, w_mean)


def _diff_indices(height: int, width: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    p = np.arange(height * width).reshape(height, width)
    return (p[:, :-1].ravel(), p[:, 1:].ravel(), p[:-1, :].ravel(), p[1:, :].ravel())


def _grad_diff_loss(out_pix: Tensor, target_pix: Tensor, idx) -> Tensor:
    left, right, up, down = idx
    dx_out = tz.sub(tz.gather_rows(out_pix, right), tz.gather_rows(out_pix, left))
    dx_t = tz.sub(tz.gather_rows(target_pix, right), tz.gather_rows(target_pix, left))
    dy_out = tz.sub(tz.gather_rows(out_pix, down), tz.gather_rows(out_pix, up))
    dy_t = tz.sub(tz.gather_rows(target_pix, down), tz.gather_rows(target_pix, up))
    return tz.add(tz.mse(dx_out, dx_t), tz.mse(dy_out, dy_t))


def invert(gen: Generator, target: ImageBuffer, cfg: InversionConfig,
           class_id: int | None = None) -> InversionResult:
    """Gradient-descent search for affine parameters reproducing ``target``.

    Returns the best-loss affine seen during optimization; generator
    weights are bit-identical before and after.
    """
    if target.height < 2 or target.width < 2:
        raise ArgumentError("invert: target must be at least 2x2")

    if cfg.init == "mean-affine":
        start = mean_affine(gen, seed=cfg.init_seed, class_id=class_id)
    else:
        rng = np.random.default_rng([cfg.init_seed, 3])
        z = rng.standard_normal(gen.config.z_dim)
        start = affine_from_w(gen, map_latent(gen, z, class_id))

    coords = Tensor(make_grid(target.height, target.width).matrix.astype(gen.dtype))
    target_t = Tensor(target.to_matrix().astype(gen.dtype))
    target_pix = tz.transpose(target_t)
    idx = _diff_indices(target.height, target.width)

    affine_t = [Tensor(np.ascontiguousarray(start.matrices[i], dtype=gen.dtype),
                       requires_grad=True)
                for i in range(start.levels)]
    names = [f"affine.{i}" for i in range(start.levels)]
    state = AdamState(lr=cfg.lr)

    def render_loss() -> Tensor:
        out, _ = _synthesis_t(gen, affine_t, coords)
        loss = tz.mse(out, target_t)
        if cfg.loss == "mse+grad":
            loss = tz.add(loss, _grad_diff_loss(tz.transpose(out), target_pix, idx))
        return loss

    def snapshot() -> AffineParams:
        return AffineParams(np.stack([a.data.copy() for a in affine_t]))

    history: list[float] = []
    best_loss = np.inf
    best = snapshot()
    for step in range(cfg.steps):
        loss = render_loss()
        value = loss.item()
        if not np.isfinite(value):
            raise TrainingError(f"invert: non-finite loss at step {step}")
        history.append(value)
        if cfg.log_every > 0 and step % cfg.log_every == 0:
            logger.info("invert step %d: loss %.4e", step, value)
        if value < best_loss:
            best_loss, best = value, snapshot()
        grads = tz.grad(loss, affine_t)
        adam_update(state, dict(zip(names, affine_t)),
                    {n: g.data for n, g in zip(names, grads)})

    with tz.no_grad():
        final = render_loss().item()
    if final < best_loss:
        best_loss, best = final, snapshot()
    history.append(best_loss)

    render = synthesize(gen, best, make_grid(target.height, target.width, dtype=gen.dtype))
    return InversionResult(best, history, psnr(render, target), ssim(render, target))
