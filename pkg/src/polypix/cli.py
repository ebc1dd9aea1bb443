"""Command-line client for the generator service.

Every subcommand builds a JSON request and posts it to the HTTP API:
against ``--server URL`` when given, otherwise against an in-process
instance of the same app, so one-shot invocations never need a running
daemon. Binary artifacts return base64-coded and are written client
side with atomic renames.

Exit codes: 0 success, 2 argument error, 3 format error, 4
training/numeric error.
"""

from __future__ import annotations

import asyncio
import json
import os
import sys

import click
import httpx

from .errors import ArgumentError
from .image import atomic_write_bytes
from .service import schemas as S

EXIT_CODES = {"argument": 2, "format": 3, "training": 4}


def _request(method: str, path: str, payload: dict | None, server: str | None) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.request(method, path, json=payload)

    from .service.app import app

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://polypix",
                                     timeout=None) as client:
            return await client.request(method, path, json=payload)

    return asyncio.run(go())


def _post(path: str, payload: dict, server: str | None) -> dict:
    resp = _request("POST", path, payload, server)
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", {})
        except ValueError:
            detail = {}
        if isinstance(detail, dict) and "kind" in detail:
            kind = detail.get("kind", "argument")
            message = detail.get("message", "request failed")
        else:
            kind, message = "argument", str(detail) or resp.text
        click.echo(f"error ({kind}): {message}", err=True)
        sys.exit(EXIT_CODES.get(kind, 1))
    return resp.json()


def _read_b64(path: str, what: str) -> str:
    if not os.path.exists(path):
        raise click.UsageError(f"{what}: no such file: {path}")
    with open(path, "rb") as f:
        return S.encode_b64(f.read())


def _write_b64(path: str, payload: str) -> None:
    atomic_write_bytes(path, S.decode_b64(payload, path))


def parse_size(text: str) -> tuple[int, int]:
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError as e:
        raise click.UsageError(f"--size expects HxW, got {text!r}") from e


def parse_levels(text: str) -> list[int]:
    """Inclusive range like ``5-9`` or a comma list like ``0,3,7``."""
    text = text.strip()
    if "-" in text and "," not in text:
        lo, hi = text.split("-")
        out = list(range(int(lo), int(hi) + 1))
        if not out:
            raise click.UsageError(f"--levels range {text!r} is empty")
        return out
    try:
        return [int(p) for p in text.split(",") if p.strip() != ""]
    except ValueError as e:
        raise click.UsageError(f"--levels expects a range or comma list, got {text!r}") from e


class RunConfigModel(S.StrictModel):
    generator: S.GeneratorConfigModel | None = None
    schedule: str | list[S.StageModel] | None = None
    inversion: dict | None = None
    seed: int | None = None
    out: str | None = None


def load_run_config(path: str | None) -> RunConfigModel:
    if path is None:
        return RunConfigModel()
    if not os.path.exists(path):
        raise click.UsageError(f"--config: no such file: {path}")
    with open(path) as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise click.UsageError(f"--config: invalid JSON: {e}") from e
    try:
        return RunConfigModel(**raw)
    except Exception as e:
        raise click.UsageError(f"--config: {e}") from e


def _generator_source(ckpt: str | None, run_cfg: RunConfigModel, init_seed: int) -> dict:
    if ckpt:
        return {"checkpoint_b64": _read_b64(ckpt, "--ckpt")}
    if run_cfg.generator is None:
        raise click.UsageError("provide --ckpt or a --config file with a generator section")
    return {"config": run_cfg.generator.model_dump(), "init_seed": init_seed}


def _affine_source(affine_path: str | None, seed: int, class_id: int | None) -> dict:
    if affine_path:
        return {"affine_b64": _read_b64(affine_path, "--affine")}
    return {"seed": seed, "class_id": class_id}


def _require_generator_config(run_cfg: RunConfigModel) -> dict:
    if run_cfg.generator is None:
        raise click.UsageError("a --config file with a generator section is required")
    return run_cfg.generator.model_dump()


server_option = click.option("--server", default=None, metavar="URL",
                             help="Remote service URL; default runs in-process.")
config_option = click.option("--config", "config_path", default=None, metavar="FILE",
                             help="JSON run config (generator/schedule/inversion/seed/out).")
ckpt_option = click.option("--ckpt", default=None, metavar="FILE",
                           help="Generator checkpoint (.pinr).")
seed_option = click.option("--seed", default=0, show_default=True, help="Random seed.")
size_option = click.option("--size", default="64x64", show_default=True, metavar="HxW")
out_option = click.option("--out", default=None, metavar="FILE", help="Output path.")


def _out_path(out: str | None, run_cfg: RunConfigModel, default: str) -> str:
    return out or run_cfg.out or default


@click.group()
def main():
    """Coordinate-based polynomial image generator."""


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("polypix.service.app:app", host=host, port=port)


@main.command("params")
@config_option
@server_option
def params(config_path, server):
    """Parameter count and per-record breakdown for a config."""
    run_cfg = load_run_config(config_path)
    body = _post("/params", {"config": _require_generator_config(run_cfg)}, server)
    for rec in body["records"]:
        shape = "x".join(str(d) for d in rec["shape"])
        click.echo(f"{rec['name']:<28} {shape:>12} {rec['count']:>12}")
    click.echo(f"{'total':<28} {'':>12} {body['total']:>12}")


@main.command("sample")
@ckpt_option
@config_option
@click.option("--init-seed", default=0, show_default=True,
              help="Weight seed when sampling from a fresh config.")
@seed_option
@click.option("--class", "class_id", default=None, type=int, help="Class id.")
@size_option
@out_option
@server_option
def sample(ckpt, config_path, init_seed, seed, class_id, size, out, server):
    """Render an image from a latent seed."""
    run_cfg = load_run_config(config_path)
    h, w = parse_size(size)
    body = _post("/sample", {
        "source": _generator_source(ckpt, run_cfg, init_seed),
        "seed": seed if seed is not None else run_cfg.seed or 0,
        "class_id": class_id,
        "height": h, "width": w,
    }, server)
    path = _out_path(out, run_cfg, "sample.png")
    _write_b64(path, body["png_b64"])
    click.echo(f"wrote {path}")


@main.command("fit")
@click.argument("target", type=click.Path())
@config_option
@click.option("--steps", default=500, show_default=True)
@click.option("--lr", default=0.01, show_default=True)
@seed_option
@out_option
@server_option
def fit(target, config_path, steps, lr, seed, out, server):
    """Fit a generator to one PNG image."""
    run_cfg = load_run_config(config_path)
    body = _post("/fit", {
        "config": _require_generator_config(run_cfg),
        "target_png_b64": _read_b64(target, "target"),
        "steps": steps, "lr": lr,
        "seed": seed if seed is not None else run_cfg.seed or 0,
    }, server)
    path = _out_path(out, run_cfg, "fit.pinr")
    _write_b64(path, body["checkpoint_b64"])
    hist = body["loss_history"]
    click.echo(f"wrote {path}  loss {hist[0]:.4e} -> {hist[-1]:.4e}  psnr {body['psnr']:.2f} dB")


@main.command("train")
@click.option("--data", "data_dir", required=True, metavar="DIR",
              help="Directory of PNG training images.")
@config_option
@click.option("--schedule", "schedule_text", default=None, metavar="SPEC",
              help='Stages as "RES:BUDGETxBATCH,..." e.g. "8:4000x8,16:4000x8".')
@click.option("--g-lr", default=None, type=float, help="Generator learning rate.")
@click.option("--d-lr", default=None, type=float, help="Discriminator learning rate.")
@seed_option
@out_option
@server_option
def train(data_dir, config_path, schedule_text, g_lr, d_lr, seed, out, server):
    """Adversarial training over a progressive resolution schedule."""
    from .training import (
        DEFAULT_DISCRIMINATOR_LR,
        DEFAULT_GENERATOR_LR,
        parse_schedule,
    )

    run_cfg = load_run_config(config_path)
    if not os.path.isdir(data_dir):
        raise click.UsageError(f"--data: not a directory: {data_dir}")
    names = sorted(n for n in os.listdir(data_dir) if n.lower().endswith(".png"))
    if not names:
        raise click.UsageError(f"--data: no PNG files in {data_dir}")
    images = [_read_b64(os.path.join(data_dir, n), n) for n in names]

    if schedule_text is None and isinstance(run_cfg.schedule, str):
        schedule_text = run_cfg.schedule
    if schedule_text is not None:
        try:
            schedule = parse_schedule(schedule_text,
                                      g_lr or DEFAULT_GENERATOR_LR,
                                      d_lr or DEFAULT_DISCRIMINATOR_LR)
        except ArgumentError as e:
            raise click.UsageError(str(e)) from e
        stages = [
            {"resolution": s.resolution, "image_budget": s.image_budget,
             "batch_size": s.batch_size, "generator_lr": s.generator_lr,
             "discriminator_lr": s.discriminator_lr}
            for s in schedule.stages
        ]
    elif isinstance(run_cfg.schedule, list):
        stages = [s.model_dump() for s in run_cfg.schedule]
    else:
        raise click.UsageError("provide --schedule or a schedule in the config file")

    body = _post("/train", {
        "config": _require_generator_config(run_cfg),
        "images_png_b64": images,
        "schedule": stages,
        "seed": seed if seed is not None else run_cfg.seed or 0,
    }, server)
    path = _out_path(out, run_cfg, "train.pinr")
    _write_b64(path, body["checkpoint_b64"])
    for st in body["stages"]:
        click.echo(
            f"stage {st['resolution']}x{st['resolution']}: {st['steps']} steps, "
            f"d_loss {st['final_d_loss']:.3f}, g_loss {st['final_g_loss']:.3f}, "
            f"disc acc {st['mean_accuracy_last_100']:.3f}"
        )
    click.echo(f"wrote {path}")


@main.command("interpolate")
@ckpt_option
@config_option
@click.option("--space", default="latent", show_default=True,
              type=click.Choice(["latent", "affine"]))
@seed_option
@click.option("--seed-b", default=None, type=int, help="Second endpoint seed (default seed+1).")
@click.option("--affine-a", default=None, metavar="FILE", help="Affine container for endpoint A.")
@click.option("--affine-b", default=None, metavar="FILE", help="Affine container for endpoint B.")
@click.option("--class", "class_id", default=None, type=int)
@click.option("--frames", default=8, show_default=True)
@size_option
@out_option
@server_option
def interpolate(ckpt, config_path, space, seed, seed_b, affine_a, affine_b,
                class_id, frames, size, out, server):
    """Write an interpolation frame sequence as numbered PNGs."""
    run_cfg = load_run_config(config_path)
    h, w = parse_size(size)
    payload = {
        "source": _generator_source(ckpt, run_cfg, 0),
        "space": space, "class_id": class_id, "frames": frames,
        "height": h, "width": w,
        "seed_a": seed, "seed_b": seed_b if seed_b is not None else seed + 1,
    }
    if space == "affine":
        if affine_a:
            payload["affine_a_b64"] = _read_b64(affine_a, "--affine-a")
            payload["seed_a"] = None
        if affine_b:
            payload["affine_b_b64"] = _read_b64(affine_b, "--affine-b")
            payload["seed_b"] = None
    body = _post("/interpolate", payload, server)
    prefix = _out_path(out, run_cfg, "interp")
    base, ext = os.path.splitext(prefix)
    ext = ext or ".png"
    for i, frame in enumerate(body["frames_png_b64"]):
        path = f"{base}_{i:03d}{ext}"
        _write_b64(path, frame)
    click.echo(f"wrote {len(body['frames_png_b64'])} frames to {base}_NNN{ext}")


def _affine_endpoint_payload(ckpt, run_cfg, affine_path, seed, class_id):
    return {
        "source": _generator_source(ckpt, run_cfg, 0),
        "affine": _affine_source(affine_path, seed, class_id),
    }


@main.command("stylemix")
@ckpt_option
@config_option
@seed_option
@click.option("--seed-b", default=None, type=int, help="Source-B seed (default seed+1).")
@click.option("--affine-a", default=None, metavar="FILE")
@click.option("--affine-b", default=None, metavar="FILE")
@click.option("--levels", "levels_text", required=True, metavar="SPEC",
              help='Levels to copy from A into B, e.g. "5-9" or "0,3,7".')
@click.option("--class", "class_id", default=None, type=int)
@size_option
@out_option
@server_option
def stylemix(ckpt, config_path, seed, seed_b, affine_a, affine_b, levels_text,
             class_id, size, out, server):
    """Copy source A's affine parameters into source B at chosen levels."""
    run_cfg = load_run_config(config_path)
    h, w = parse_size(size)
    body = _post("/stylemix", {
        "source": _generator_source(ckpt, run_cfg, 0),
        "affine_a": _affine_source(affine_a, seed, class_id),
        "affine_b": _affine_source(affine_b, seed_b if seed_b is not None else seed + 1,
                                   class_id),
        "levels": parse_levels(levels_text),
        "height": h, "width": w,
    }, server)
    path = _out_path(out, run_cfg, "stylemix.png")
    _write_b64(path, body["png_b64"])
    click.echo(f"wrote {path}")


@main.command("extrapolate")
@ckpt_option
@config_option
@seed_option
@click.option("--affine", "affine_path", default=None, metavar="FILE")
@click.option("--margin", default=0.25, show_default=True)
@click.option("--class", "class_id", default=None, type=int)
@size_option
@out_option
@server_option
def extrapolate(ckpt, config_path, seed, affine_path, margin, class_id, size, out, server):
    """Render on [-margin, 1+margin]^2, beyond the training square."""
    run_cfg = load_run_config(config_path)
    h, w = parse_size(size)
    payload = _affine_endpoint_payload(ckpt, run_cfg, affine_path, seed, class_id)
    payload.update({"margin": margin, "height": h, "width": w})
    body = _post("/extrapolate", payload, server)
    path = _out_path(out, run_cfg, "extrapolate.png")
    _write_b64(path, body["png_b64"])
    click.echo(f"wrote {path}")


@main.command("upsample")
@ckpt_option
@config_option
@seed_option
@click.option("--affine", "affine_path", default=None, metavar="FILE")
@click.option("--factor", default=2, show_default=True)
@click.option("--mode", default="nested", show_default=True,
              type=click.Choice(["nested", "standard"]))
@click.option("--class", "class_id", default=None, type=int)
@size_option
@out_option
@server_option
def upsample(ckpt, config_path, seed, affine_path, factor, mode, class_id, size, out, server):
    """Dense-grid render above a base resolution."""
    run_cfg = load_run_config(config_path)
    h, w = parse_size(size)
    payload = _affine_endpoint_payload(ckpt, run_cfg, affine_path, seed, class_id)
    payload.update({"base_height": h, "base_width": w, "factor": factor, "mode": mode})
    body = _post("/upsample", payload, server)
    path = _out_path(out, run_cfg, "upsample.png")
    _write_b64(path, body["png_b64"])
    click.echo(f"wrote {path} ({body['height']}x{body['width']})")


@main.command("heatmap")
@ckpt_option
@config_option
@seed_option
@click.option("--affine", "affine_path", default=None, metavar="FILE")
@click.option("--level", default=0, show_default=True)
@click.option("--class", "class_id", default=None, type=int)
@size_option
@out_option
@server_option
def heatmap(ckpt, config_path, seed, affine_path, level, class_id, size, out, server):
    """Per-level feature heat-map as a grayscale PNG."""
    run_cfg = load_run_config(config_path)
    h, w = parse_size(size)
    payload = _affine_endpoint_payload(ckpt, run_cfg, affine_path, seed, class_id)
    payload.update({"level": level, "height": h, "width": w})
    body = _post("/heatmap", payload, server)
    path = _out_path(out, run_cfg, "heatmap.png")
    _write_b64(path, body["png_b64"])
    click.echo(f"wrote {path}")


@main.command("invert")
@click.argument("target", type=click.Path())
@ckpt_option
@config_option
@click.option("--steps", default=1000, show_default=True)
@click.option("--lr", default=0.02, show_default=True)
@click.option("--init", default="mean-affine", show_default=True,
              type=click.Choice(["mean-affine", "from-z"]))
@click.option("--init-seed", default=0, show_default=True)
@click.option("--loss", default="mse", show_default=True,
              type=click.Choice(["mse", "mse+grad"]))
@click.option("--class", "class_id", default=None, type=int)
@out_option
@server_option
def invert(target, ckpt, config_path, steps, lr, init, init_seed, loss, class_id,
           out, server):
    """Embed a PNG into affine-parameter space under a frozen generator."""
    run_cfg = load_run_config(config_path)
    inv_defaults = run_cfg.inversion or {}
    body = _post("/invert", {
        "source": _generator_source(ckpt, run_cfg, 0),
        "target_png_b64": _read_b64(target, "target"),
        "steps": steps, "lr": lr, "init": init,
        "init_seed": init_seed, "loss": loss,
        "log_every": int(inv_defaults.get("log_every", 50)),
        "class_id": class_id,
    }, server)
    path = _out_path(out, run_cfg, "affine.pinr")
    _write_b64(path, body["affine_b64"])
    click.echo(f"wrote {path}  psnr {body['psnr']:.2f} dB  ssim {body['ssim']:.4f}")


@main.command("bench")
@ckpt_option
@config_option
@click.option("--sizes", default="32,64,128", show_default=True,
              help="Comma list of square resolutions.")
@click.option("--repeats", default=2, show_default=True)
@seed_option
@server_option
def bench(ckpt, config_path, sizes, repeats, seed, server):
    """Seconds-per-image across resolutions (hardware-dependent)."""
    run_cfg = load_run_config(config_path)
    try:
        resolutions = [int(s) for s in sizes.split(",") if s.strip()]
    except ValueError as e:
        raise click.UsageError(f"--sizes expects a comma list, got {sizes!r}") from e
    body = _post("/bench", {
        "source": _generator_source(ckpt, run_cfg, 0),
        "resolutions": resolutions, "repeats": repeats, "seed": seed,
    }, server)
    click.echo(f"{'resolution':>12} {'sec/image':>12}")
    for row in body["rows"]:
        click.echo(f"{row['resolution']:>10}^2 {row['seconds_per_image']:>12.4f}")


if __name__ == "__main__":
    main()
