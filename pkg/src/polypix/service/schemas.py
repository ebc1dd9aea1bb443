"""Pydantic request/response models for the HTTP service.

Binary payloads (PNG images, checkpoint containers) travel base64-coded
inside JSON so the CLI can write files client-side. A generator is
specified either by an uploaded checkpoint or by a config plus an init
seed; affine parameters either by a latent seed or an uploaded affine
container.
"""

from __future__ import annotations

import base64
import binascii

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import ArgumentError
from ..generator import GeneratorConfig
from ..training import (
    DEFAULT_DISCRIMINATOR_LR,
    DEFAULT_GENERATOR_LR,
    R1_GAMMA,
    R1_INTERVAL,
    Schedule,
    Stage,
)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


def decode_b64(payload: str, what: str) -> bytes:
    try:
        return base64.b64decode(payload.encode("ascii"), validate=True)
    except (binascii.Error, ValueError) as e:
        raise ArgumentError(f"{what}: invalid base64 payload: {e}") from e


def encode_b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


class GeneratorConfigModel(StrictModel):
    z_dim: int = 64
    w_dim: int = 512
    levels: int = 10
    feature_dim: int = 512
    num_classes: int = 0
    class_embed_dim: int | None = None
    leaky_slope: float = 0.2
    test_identity_activation: bool = False

    def to_config(self) -> GeneratorConfig:
        return GeneratorConfig(**self.model_dump())

    @staticmethod
    def from_config(cfg: GeneratorConfig) -> "GeneratorConfigModel":
        return GeneratorConfigModel(**cfg.to_dict())


class GeneratorSource(StrictModel):
    """Exactly one of an uploaded checkpoint or a config + init seed."""

    checkpoint_b64: str | None = None
    config: GeneratorConfigModel | None = None
    init_seed: int = 0

    @model_validator(mode="after")
    def _one_of(self):
        if (self.checkpoint_b64 is None) == (self.config is None):
            raise ValueError("provide exactly one of checkpoint_b64 or config")
        return self


class AffineSource(StrictModel):
    """Either a latent seed (routed through the mapping network) or an
    uploaded affine container."""

    seed: int | None = None
    affine_b64: str | None = None
    class_id: int | None = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.seed is None) == (self.affine_b64 is None):
            raise ValueError("provide exactly one of seed or affine_b64")
        return self


class StageModel(StrictModel):
    resolution: int
    image_budget: int
    batch_size: int
    generator_lr: float = DEFAULT_GENERATOR_LR
    discriminator_lr: float = DEFAULT_DISCRIMINATOR_LR

    def to_stage(self) -> Stage:
        return Stage(**self.model_dump())


def schedule_from_models(stages: list[StageModel]) -> Schedule:
    return Schedule(tuple(s.to_stage() for s in stages))


# ---------------------------------------------------------------------------
# requests

class ParamsRequest(StrictModel):
    config: GeneratorConfigModel


class SampleRequest(StrictModel):
    source: GeneratorSource
    seed: int = 0
    class_id: int | None = None
    height: int = 64
    width: int = 64


class FitRequest(StrictModel):
    config: GeneratorConfigModel
    target_png_b64: str
    steps: int = 500
    lr: float = 0.01
    seed: int = 0
    class_id: int | None = None


class TrainRequest(StrictModel):
    config: GeneratorConfigModel
    images_png_b64: list[str]
    schedule: list[StageModel]
    seed: int = 0
    r1_interval: int = R1_INTERVAL
    r1_gamma: float = R1_GAMMA
    hidden_dim: int = 128


class InterpolateRequest(StrictModel):
    source: GeneratorSource
    space: str = "latent"
    seed_a: int | None = None
    seed_b: int | None = None
    affine_a_b64: str | None = None
    affine_b_b64: str | None = None
    class_id: int | None = None
    frames: int = Field(default=8, ge=1)
    t: float | None = None
    height: int = 64
    width: int = 64


class StyleMixRequest(StrictModel):
    source: GeneratorSource
    affine_a: AffineSource
    affine_b: AffineSource
    levels: list[int]
    height: int = 64
    width: int = 64


class ExtrapolateRequest(StrictModel):
    source: GeneratorSource
    affine: AffineSource
    margin: float = 0.25
    height: int = 64
    width: int = 64


class UpsampleRequest(StrictModel):
    source: GeneratorSource
    affine: AffineSource
    base_height: int = 64
    base_width: int = 64
    factor: int = 2
    mode: str = "nested"


class HeatmapRequest(StrictModel):
    source: GeneratorSource
    affine: AffineSource
    level: int = 0
    height: int = 64
    width: int = 64


class InvertRequest(StrictModel):
    source: GeneratorSource
    target_png_b64: str
    steps: int = 1000
    lr: float = 0.02
    init: str = "mean-affine"
    init_seed: int = 0
    loss: str = "mse"
    log_every: int = 50
    class_id: int | None = None


class BenchRequest(StrictModel):
    source: GeneratorSource
    resolutions: list[int] = Field(default_factory=lambda: [32, 64, 128])
    repeats: int = Field(default=2, ge=1)
    seed: int = 0


# ---------------------------------------------------------------------------
# responses

class HealthResponse(StrictModel):
    status: str


class ParamRecord(StrictModel):
    name: str
    shape: list[int]
    count: int


class ParamsResponse(StrictModel):
    total: int
    records: list[ParamRecord]


class ImageResponse(StrictModel):
    png_b64: str
    height: int
    width: int


class FramesResponse(StrictModel):
    frames_png_b64: list[str]
    height: int
    width: int


class FitResponse(StrictModel):
    checkpoint_b64: str
    loss_history: list[float]
    psnr: float


class StageStatsModel(StrictModel):
    resolution: int
    steps: int
    final_d_loss: float
    final_g_loss: float
    mean_accuracy_last_100: float


class TrainResponse(StrictModel):
    checkpoint_b64: str
    stages: list[StageStatsModel]


class InvertResponse(StrictModel):
    affine_b64: str
    loss_history: list[float]
    psnr: float
    ssim: float


class BenchRow(StrictModel):
    resolution: int
    seconds_per_image: float


class BenchResponse(StrictModel):
    rows: list[BenchRow]


class ErrorDetail(StrictModel):
    kind: str
    message: str
