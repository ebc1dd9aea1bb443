"""FastAPI service wrapping the generator library.

Every operation is a synchronous POST with JSON in and out; images and
checkpoint containers are base64 fields so clients own their files.
Library errors map onto a structured detail body whose ``kind`` the CLI
translates into exit codes: argument (2), format (3), training (4).
"""

from __future__ import annotations

import time

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import checkpoint as ckpt
from .. import manipulation as manip
from ..errors import (
    ArgumentError,
    EvaluationError,
    FormatError,
    PolypixError,
    TrainingError,
)
from ..generator import (
    AffineParams,
    Generator,
    count_params,
    init_generator,
    latent_to_affine,
    parameter_order,
    sample,
    synthesize,
)
from ..grid import make_grid
from ..image import decode_png, encode_png
from ..inversion import InversionConfig, invert
from ..metrics import psnr
from ..training import fit_latent, fit_single_image, train_adversarial
from . import schemas as S

API_VERSION = "1"


def _resolve_generator(source: S.GeneratorSource) -> Generator:
    if source.checkpoint_b64 is not None:
        return ckpt.generator_from_bytes(S.decode_b64(source.checkpoint_b64, "checkpoint"))
    return init_generator(source.config.to_config(), source.init_seed)


def _resolve_affine(gen: Generator, source: S.AffineSource) -> AffineParams:
    if source.affine_b64 is not None:
        return ckpt.affine_from_bytes(S.decode_b64(source.affine_b64, "affine"))
    z = np.random.default_rng(source.seed).standard_normal(gen.config.z_dim)
    return latent_to_affine(gen, z, source.class_id)


def _image_response(img) -> S.ImageResponse:
    return S.ImageResponse(png_b64=S.encode_b64(encode_png(img)),
                           height=img.height, width=img.width)


def create_app() -> FastAPI:
    app = FastAPI(title="polypix", version=API_VERSION)

    @app.exception_handler(PolypixError)
    async def _lib_error(request: Request, exc: PolypixError):
        if isinstance(exc, FormatError):
            kind, status = "format", 400
        elif isinstance(exc, (TrainingError, EvaluationError)):
            kind, status = "training", 500
        else:
            kind, status = "argument", 400
        return JSONResponse(status_code=status,
                            content={"detail": {"kind": kind, "message": str(exc)}})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"detail": {"kind": "argument", "message": str(exc)}})

    @app.get("/healthz", response_model=S.HealthResponse)
    def healthz():
        return S.HealthResponse(status="ok")

    @app.post("/params", response_model=S.ParamsResponse)
    def params(req: S.ParamsRequest):
        cfg = req.config.to_config()
        records = [
            S.ParamRecord(name=name, shape=list(shape), count=int(np.prod(shape)))
            for name, shape in parameter_order(cfg)
        ]
        return S.ParamsResponse(total=count_params(cfg), records=records)

    @app.post("/sample", response_model=S.ImageResponse)
    def sample_endpoint(req: S.SampleRequest):
        gen = _resolve_generator(req.source)
        z = np.random.default_rng(req.seed).standard_normal(gen.config.z_dim)
        return _image_response(sample(gen, z, req.class_id, req.height, req.width))

    @app.post("/fit", response_model=S.FitResponse)
    def fit(req: S.FitRequest):
        target = decode_png(S.decode_b64(req.target_png_b64, "target image"))
        gen, history = fit_single_image(req.config.to_config(), target, req.steps,
                                        req.lr, req.seed, class_id=req.class_id)
        z = fit_latent(gen.config, req.seed)
        render = synthesize(gen, latent_to_affine(gen, z, req.class_id),
                            make_grid(target.height, target.width, dtype=gen.dtype))
        return S.FitResponse(checkpoint_b64=S.encode_b64(ckpt.generator_bytes(gen)),
                             loss_history=history, psnr=psnr(render, target))

    @app.post("/train", response_model=S.TrainResponse)
    def train(req: S.TrainRequest):
        images = [decode_png(S.decode_b64(p, f"dataset image {i}"))
                  for i, p in enumerate(req.images_png_b64)]
        schedule = S.schedule_from_models(req.schedule)
        gen, stats = train_adversarial(req.config.to_config(), images, schedule,
                                       req.seed, r1_interval=req.r1_interval,
                                       r1_gamma=req.r1_gamma, hidden_dim=req.hidden_dim)
        rows = [
            S.StageStatsModel(
                resolution=st.resolution,
                steps=st.steps,
                final_d_loss=st.d_losses[-1],
                final_g_loss=st.g_losses[-1],
                mean_accuracy_last_100=float(np.mean(st.accuracies[-100:])),
            )
            for st in stats
        ]
        return S.TrainResponse(checkpoint_b64=S.encode_b64(ckpt.generator_bytes(gen)),
                               stages=rows)

    @app.post("/interpolate", response_model=S.FramesResponse)
    def interpolate(req: S.InterpolateRequest):
        gen = _resolve_generator(req.source)
        if req.space == "latent":
            if req.seed_a is None or req.seed_b is None:
                raise ArgumentError("interpolate: latent space needs seed_a and seed_b")
            end_a = np.random.default_rng(req.seed_a).standard_normal(gen.config.z_dim)
            end_b = np.random.default_rng(req.seed_b).standard_normal(gen.config.z_dim)
        elif req.space == "affine":
            end_a = _resolve_affine(gen, S.AffineSource(
                seed=req.seed_a, affine_b64=req.affine_a_b64, class_id=req.class_id))
            end_b = _resolve_affine(gen, S.AffineSource(
                seed=req.seed_b, affine_b64=req.affine_b_b64, class_id=req.class_id))
        else:
            raise ArgumentError(f"interpolate: unknown space {req.space!r}")
        if req.t is not None:
            ts = [req.t]
        elif req.frames == 1:
            ts = [0.0]
        else:
            ts = [i / (req.frames - 1) for i in range(req.frames)]
        frames = [
            manip.interpolate(gen, end_a, end_b, t, space=req.space,
                              class_id=req.class_id, height=req.height, width=req.width)
            for t in ts
        ]
        return S.FramesResponse(
            frames_png_b64=[S.encode_b64(encode_png(f)) for f in frames],
            height=req.height, width=req.width,
        )

    @app.post("/stylemix", response_model=S.ImageResponse)
    def stylemix(req: S.StyleMixRequest):
        gen = _resolve_generator(req.source)
        affine_a = _resolve_affine(gen, req.affine_a)
        affine_b = _resolve_affine(gen, req.affine_b)
        return _image_response(manip.style_mix(gen, affine_a, affine_b, req.levels,
                                               height=req.height, width=req.width))

    @app.post("/extrapolate", response_model=S.ImageResponse)
    def extrapolate(req: S.ExtrapolateRequest):
        gen = _resolve_generator(req.source)
        affine = _resolve_affine(gen, req.affine)
        return _image_response(manip.extrapolate(gen, affine, req.margin,
                                                 req.height, req.width))

    @app.post("/upsample", response_model=S.ImageResponse)
    def upsample(req: S.UpsampleRequest):
        gen = _resolve_generator(req.source)
        affine = _resolve_affine(gen, req.affine)
        return _image_response(manip.upsample_render(gen, affine, req.base_height,
                                                     req.base_width, req.factor,
                                                     mode=req.mode))

    @app.post("/heatmap", response_model=S.ImageResponse)
    def heatmap(req: S.HeatmapRequest):
        gen = _resolve_generator(req.source)
        affine = _resolve_affine(gen, req.affine)
        grid = make_grid(req.height, req.width, dtype=gen.dtype)
        hm = manip.heatmap(gen, affine, grid, req.level)
        return _image_response(hm.to_image())

    @app.post("/invert", response_model=S.InvertResponse)
    def invert_endpoint(req: S.InvertRequest):
        gen = _resolve_generator(req.source)
        target = decode_png(S.decode_b64(req.target_png_b64, "target image"))
        cfg = InversionConfig(steps=req.steps, lr=req.lr, init=req.init,
                              init_seed=req.init_seed, loss=req.loss,
                              log_every=req.log_every)
        result = invert(gen, target, cfg, class_id=req.class_id)
        return S.InvertResponse(affine_b64=S.encode_b64(ckpt.affine_bytes(result.affine)),
                                loss_history=result.loss_history,
                                psnr=result.psnr, ssim=result.ssim)

    @app.post("/bench", response_model=S.BenchResponse)
    def bench(req: S.BenchRequest):
        gen = _resolve_generator(req.source)
        z = np.random.default_rng(req.seed).standard_normal(gen.config.z_dim)
        class_id = 0 if gen.config.conditional else None
        rows = []
        for res in req.resolutions:
            sample(gen, z, class_id, res, res)  # warm-up render
            t0 = time.perf_counter()
            for _ in range(req.repeats):
                sample(gen, z, class_id, res, res)
            rows.append(S.BenchRow(
                resolution=res,
                seconds_per_image=(time.perf_counter() - t0) / req.repeats,
            ))
        return S.BenchResponse(rows=rows)

    return app


app = create_app()
