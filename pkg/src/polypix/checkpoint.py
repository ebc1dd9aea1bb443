"""Binary checkpoint container (PINR format, version 1).

Layout, all integers little-endian:

    magic   b"PINR"
    version u32 = 1
    config  u64 JSON length, then UTF-8 JSON
    records one per parameter, in canonical order:
        name  u32 length + UTF-8 bytes
        rank  u32
        dims  u64 per axis
        data  float32 raw values, row-major

Generator files carry ``kind: "generator"`` plus the full config in the
JSON; affine-parameter files carry ``kind: "affine"`` with levels and
feature_dim, and one record per level named ``affine.<i>``. Unknown
JSON keys are rejected. The format is platform-independent.
"""

from __future__ import annotations

import io
import json
import struct

import numpy as np

from .errors import (
    ArgumentError,
    BadMagicError,
    RecordMismatchError,
    TruncatedFileError,
    UnsupportedVersionError,
)
from .generator import AffineParams, Generator, GeneratorConfig, parameter_order
from .image import atomic_write_bytes
from .tensor import Tensor

MAGIC = b"PINR"
VERSION = 1


def _write_record(buf: io.BytesIO, name: str, arr: np.ndarray) -> None:
    encoded = name.encode("utf-8")
    buf.write(struct.pack("<I", len(encoded)))
    buf.write(encoded)
    buf.write(struct.pack("<I", arr.ndim))
    for dim in arr.shape:
        buf.write(struct.pack("<Q", dim))
    buf.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.context = "header"

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.data):
            raise TruncatedFileError(
                f"checkpoint truncated while reading {self.context} "
                f"(needed {count} bytes at offset {self.pos})"
            )
        out = self.data[self.pos : self.pos + count]
        self.pos += count
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def done(self) -> bool:
        return self.pos == len(self.data)


def _serialize(config_json: dict, records: list[tuple[str, np.ndarray]]) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", VERSION))
    payload = json.dumps(config_json, sort_keys=True).encode("utf-8")
    buf.write(struct.pack("<Q", len(payload)))
    buf.write(payload)
    for name, arr in records:
        _write_record(buf, name, arr)
    return buf.getvalue()


def _read_header(reader: _Reader) -> dict:
    reader.context = "magic"
    if reader.take(4) != MAGIC:
        raise BadMagicError("not a PINR checkpoint (bad magic)")
    reader.context = "version"
    version = reader.u32()
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported checkpoint version {version}")
    reader.context = "config"
    length = reader.u64()
    try:
        cfg = json.loads(reader.take(length).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise RecordMismatchError(f"checkpoint config JSON is invalid: {e}") from e
    if not isinstance(cfg, dict):
        raise RecordMismatchError("checkpoint config JSON must be an object")
    return cfg


def _read_record(reader: _Reader, expected_name: str,
                 expected_shape: tuple[int, ...]) -> np.ndarray:
    reader.context = f"record {expected_name!r} name"
    name = reader.take(reader.u32()).decode("utf-8")
    if name != expected_name:
        raise RecordMismatchError(
            f"checkpoint record {name!r} where {expected_name!r} was expected"
        )
    reader.context = f"record {name!r} dims"
    rank = reader.u32()
    dims = tuple(reader.u64() for _ in range(rank))
    if dims != tuple(expected_shape):
        raise RecordMismatchError(
            f"checkpoint record {name!r} has shape {dims}, expected {tuple(expected_shape)}"
        )
    count = int(np.prod(dims, dtype=np.int64)) if dims else 1
    reader.context = f"record {name!r} data"
    raw = reader.take(4 * count)
    return np.frombuffer(raw, dtype="<f4").reshape(dims).copy()


# ---------------------------------------------------------------------------
# generators

def generator_bytes(gen: Generator) -> bytes:
    cfg = {"kind": "generator", **gen.config.to_dict()}
    records = [(name, gen.params[name].data) for name, _ in parameter_order(gen.config)]
    return _serialize(cfg, records)


def save_checkpoint(path: str, gen: Generator) -> None:
    atomic_write_bytes(path, generator_bytes(gen))


def generator_from_bytes(data: bytes, dtype=np.float32) -> Generator:
    reader = _Reader(data)
    cfg_json = _read_header(reader)
    kind = cfg_json.pop("kind", "generator")
    if kind != "generator":
        raise RecordMismatchError(f"expected a generator checkpoint, found kind {kind!r}")
    try:
        config = GeneratorConfig.from_dict(cfg_json)
    except ArgumentError as e:
        raise RecordMismatchError(f"checkpoint config rejected: {e}") from e
    params: dict[str, Tensor] = {}
    for name, shape in parameter_order(config):
        arr = _read_record(reader, name, shape)
        params[name] = Tensor(arr.astype(dtype), requires_grad=True)
    if not reader.done():
        raise RecordMismatchError(
            f"{len(reader.data) - reader.pos} trailing bytes after the last record"
        )
    return Generator(config, params)


def load_checkpoint(path: str, dtype=np.float32) -> Generator:
    with open(path, "rb") as f:
        return generator_from_bytes(f.read(), dtype=dtype)


# ---------------------------------------------------------------------------
# affine parameters

def affine_bytes(affine: AffineParams) -> bytes:
    cfg = {"kind": "affine", "levels": affine.levels, "feature_dim": affine.feature_dim}
    records = [(f"affine.{i}", affine.matrices[i]) for i in range(affine.levels)]
    return _serialize(cfg, records)


def save_affine(path: str, affine: AffineParams) -> None:
    atomic_write_bytes(path, affine_bytes(affine))


def affine_from_bytes(data: bytes) -> AffineParams:
    reader = _Reader(data)
    cfg = _read_header(reader)
    kind = cfg.pop("kind", None)
    if kind != "affine":
        raise RecordMismatchError(f"expected an affine checkpoint, found kind {kind!r}")
    unknown = set(cfg) - {"levels", "feature_dim"}
    if unknown:
        raise RecordMismatchError(f"affine checkpoint has unknown keys {sorted(unknown)}")
    try:
        levels, n = int(cfg["levels"]), int(cfg["feature_dim"])
    except KeyError as e:
        raise RecordMismatchError(f"affine checkpoint missing key {e}") from e
    if levels < 1 or n < 1:
        raise RecordMismatchError("affine checkpoint has non-positive dimensions")
    mats = [_read_record(reader, f"affine.{i}", (n, 3)) for i in range(levels)]
    if not reader.done():
        raise RecordMismatchError(
            f"{len(reader.data) - reader.pos} trailing bytes after the last record"
        )
    return AffineParams(np.stack(mats))


def load_affine(path: str) -> AffineParams:
    with open(path, "rb") as f:
        return affine_from_bytes(f.read())


def load_any(path: str):
    """Load a PINR file as a Generator or AffineParams depending on its kind."""
    with open(path, "rb") as f:
        data = f.read()
    kind = peek_kind(data)
    if kind == "generator":
        return generator_from_bytes(data)
    if kind == "affine":
        return affine_from_bytes(data)
    raise RecordMismatchError(f"unknown checkpoint kind {kind!r}")


def peek_kind(data: bytes) -> str:
    cfg = _read_header(_Reader(data))
    return cfg.get("kind", "generator")


def require_file(path: str) -> None:
    import os

    if not os.path.exists(path):
        raise ArgumentError(f"no such file: {path}")
