"""The polynomial coordinate-image generator.

A latent vector is mapped through a two-layer MLP to an intermediate
vector w, per-level linear heads turn w into affine matrices A_i of
shape (n, 3), and the synthesis recurrence

    F_0 = act(W_0 (A_0 X))
    F_i = act(W_i ((A_i X) * F_{i-1}))        elementwise product, i >= 1
    out = rgb(F_{L-1})

evaluates a piecewise-polynomial function of the pixel coordinates at
every column of the grid X independently. Each elementwise product with
an affine-transformed coordinate can raise the polynomial order in x or
y by one, so with identity activation the output restricted to a grid
row is a polynomial in x of degree at most ``levels``.

Everything the image depends on, given fixed weights, lives in the
affine matrices; interpolation, style mixing and inversion operate on
them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from . import tensor as tz
from .errors import ArgumentError
from .grid import CoordinateGrid, make_grid
from .image import ImageBuffer
from .tensor import Tensor

DEFAULT_HEAD_WEIGHT_SCALE = 0.01


@dataclass(frozen=True)
class GeneratorConfig:
    z_dim: int = 64
    w_dim: int = 512
    levels: int = 10
    feature_dim: int = 512
    num_classes: int = 0
    class_embed_dim: int | None = None
    leaky_slope: float = 0.2
    test_identity_activation: bool = False

    def __post_init__(self):
        if self.class_embed_dim is None:
            object.__setattr__(self, "class_embed_dim", self.w_dim)
        if self.levels < 1:
            raise ArgumentError(f"GeneratorConfig: levels must be >= 1, got {self.levels}")
        for name in ("z_dim", "w_dim", "feature_dim", "class_embed_dim"):
            if getattr(self, name) < 1:
                raise ArgumentError(f"GeneratorConfig: {name} must be >= 1")
        if self.num_classes < 0:
            raise ArgumentError("GeneratorConfig: num_classes must be >= 0")
        if not 0.0 < self.leaky_slope < 1.0:
            raise ArgumentError(
                f"GeneratorConfig: leaky_slope must be in (0, 1), got {self.leaky_slope}"
            )

    @property
    def conditional(self) -> bool:
        return self.num_classes > 0

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "GeneratorConfig":
        known = {f for f in GeneratorConfig.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ArgumentError(f"GeneratorConfig: unknown keys {sorted(unknown)}")
        return GeneratorConfig(**d)


def parameter_order(config: GeneratorConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Canonical (name, shape) list; also the checkpoint record order."""
    n, w = config.feature_dim, config.w_dim
    entries: list[tuple[str, tuple[int, ...]]] = []
    if config.conditional:
        entries.append(("class_embedding", (config.num_classes, config.class_embed_dim)))
    map_in = config.z_dim + (config.class_embed_dim if config.conditional else 0)
    entries += [
        ("mapping.0.weight", (w, map_in)),
        ("mapping.0.bias", (w, 1)),
        ("mapping.1.weight", (w, w)),
        ("mapping.1.bias", (w, 1)),
    ]
    for i in range(config.levels):
        entries += [
            (f"affine_head.{i}.weight", (3 * n, w)),
            (f"affine_head.{i}.bias", (3 * n, 1)),
            (f"synthesis.{i}.weight", (n, n)),
            (f"synthesis.{i}.bias", (n, 1)),
        ]
    entries += [("rgb_head.weight", (3, n)), ("rgb_head.bias", (3, 1))]
    return entries


def count_params(config: GeneratorConfig) -> int:
    """Exact number of scalars a generator with this config allocates."""
    return sum(int(np.prod(shape)) for _, shape in parameter_order(config))


@dataclass
class Generator:
    """Config plus named weight tensors; immutable outside optimizer steps."""

    config: GeneratorConfig
    params: dict[str, Tensor]

    @property
    def dtype(self):
        return self.params["rgb_head.weight"].dtype

    def param_values(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.params.items()}

    def clone(self) -> "Generator":
        return Generator(self.config, {
            k: Tensor(v.data.copy(), requires_grad=True) for k, v in self.params.items()
        })

    def astype(self, dtype) -> "Generator":
        return Generator(self.config, {
            k: Tensor(v.data.astype(dtype), requires_grad=True)
            for k, v in self.params.items()
        })


@dataclass(frozen=True)
class AffineParams:
    """Per-level (n, 3) matrices; columns weight x, y and the bias."""

    matrices: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = self.matrices
        if m.ndim != 3 or m.shape[2] != 3:
            raise ArgumentError(f"AffineParams: expected (levels, n, 3), got {m.shape}")

    @property
    def levels(self) -> int:
        return self.matrices.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.matrices.shape[1]

    def with_constant_colors(self) -> "AffineParams":
        """Copy with the x/y columns zeroed: renders a constant image."""
        m = self.matrices.copy()
        m[:, :, 0] = 0
        m[:, :, 1] = 0
        return AffineParams(m)


def init_generator(config: GeneratorConfig, seed: int, dtype=np.float32) -> Generator:
    """Deterministic weights from the seed.

    Linear weights are Normal(0, 1/sqrt(fan_in)); affine-head weights are
    shrunk by 0.01 and their bias column for the constant coefficient is
    Normal(0, 1), so a fresh generator starts near the constant-image
    regime. The class embedding, when present, is Normal(0, 1).
    """
    rng = np.random.default_rng(int(seed))
    n = config.feature_dim
    params: dict[str, Tensor] = {}
    for name, shape in parameter_order(config):
        if name == "class_embedding":
            arr = rng.standard_normal(shape)
        elif name.endswith(".weight"):
            fan_in = shape[1]
            sigma = 1.0 / np.sqrt(fan_in)
            if name.startswith("affine_head."):
                sigma *= DEFAULT_HEAD_WEIGHT_SCALE
            arr = rng.standard_normal(shape) * sigma
        elif name.startswith("affine_head.") and name.endswith(".bias"):
            arr = np.zeros(shape)
            arr[2::3, 0] = rng.standard_normal(n)
        else:
            arr = np.zeros(shape)
        params[name] = Tensor(arr.astype(dtype), requires_grad=True)
    return Generator(config, params)


# ---------------------------------------------------------------------------
# graph-building forward passes (gradients flow through these)

def _activation(gen: Generator, t: Tensor) -> Tensor:
    if gen.config.test_identity_activation:
        return t
    return tz.leaky_relu(t, gen.config.leaky_slope)


def _mapping_t(gen: Generator, z: Tensor, class_id: int | None) -> Tensor:
    cfg = gen.config
    if z.shape != (cfg.z_dim, 1):
        raise ArgumentError(f"map_latent: expected z of length {cfg.z_dim}, got {z.shape}")
    if cfg.conditional:
        if class_id is None:
            raise ArgumentError("map_latent: class_id required for a conditional generator")
        if not 0 <= int(class_id) < cfg.num_classes:
            raise ArgumentError(
                f"map_latent: class_id {class_id} outside [0, {cfg.num_classes})"
            )
        emb = tz.transpose(tz.gather_rows(gen.params["class_embedding"], [int(class_id)]))
        x = tz.vstack([z, emb])
    else:
        if class_id is not None:
            raise ArgumentError("map_latent: class_id given but generator is unconditional")
        x = z
    h = tz.add_bias(tz.matmul(gen.params["mapping.0.weight"], x), gen.params["mapping.0.bias"])
    h = tz.leaky_relu(h, gen.config.leaky_slope)
    return tz.add_bias(tz.matmul(gen.params["mapping.1.weight"], h), gen.params["mapping.1.bias"])


def _affine_heads_t(gen: Generator, w: Tensor) -> list[Tensor]:
    cfg = gen.config
    if w.shape != (cfg.w_dim, 1):
        raise ArgumentError(f"affine_from_w: expected w of length {cfg.w_dim}, got {w.shape}")
    mats = []
    for i in range(cfg.levels):
        flat = tz.add_bias(
            tz.matmul(gen.params[f"affine_head.{i}.weight"], w),
            gen.params[f"affine_head.{i}.bias"],
        )
        mats.append(tz.reshape(flat, (cfg.feature_dim, 3)))
    return mats


def _synthesis_t(gen: Generator, affine: list[Tensor], coords: Tensor,
                 collect: bool = False) -> tuple[Tensor, list[Tensor]]:
    cfg = gen.config
    if len(affine) != cfg.levels:
        raise ArgumentError(
            f"synthesize: got {len(affine)} affine levels, generator has {cfg.levels}"
        )
    for i, a in enumerate(affine):
        if a.shape != (cfg.feature_dim, 3):
            raise ArgumentError(
                f"synthesize: affine level {i} has shape {a.shape}, "
                f"expected ({cfg.feature_dim}, 3)"
            )
    if coords.data.ndim != 2 or coords.shape[0] != 3:
        raise ArgumentError(f"synthesize: coordinate matrix must be (3, P), got {coords.shape}")

    feats: list[Tensor] = []
    f: Tensor | None = None
    for i in range(cfg.levels):
        ax = tz.matmul(affine[i], coords, column_stable=True)
        m = ax if f is None else tz.mul(ax, f)
        pre = tz.add_bias(
            tz.matmul(gen.params[f"synthesis.{i}.weight"], m, column_stable=True),
            gen.params[f"synthesis.{i}.bias"],
        )
        f = _activation(gen, pre)
        if collect:
            feats.append(f)
    out = tz.add_bias(
        tz.matmul(gen.params["rgb_head.weight"], f, column_stable=True),
        gen.params["rgb_head.bias"],
    )
    return out, feats


def _affine_tensors(gen: Generator, affine: AffineParams) -> list[Tensor]:
    cfg = gen.config
    if affine.levels != cfg.levels or affine.feature_dim != cfg.feature_dim:
        raise ArgumentError(
            f"synthesize: affine of shape {affine.matrices.shape} does not match "
            f"(levels={cfg.levels}, n={cfg.feature_dim})"
        )
    return [Tensor(np.ascontiguousarray(affine.matrices[i], dtype=gen.dtype))
            for i in range(cfg.levels)]


def _coords_tensor(gen: Generator, coords: np.ndarray) -> Tensor:
    return Tensor(np.ascontiguousarray(coords, dtype=gen.dtype))


# ---------------------------------------------------------------------------
# public operations

def map_latent(gen: Generator, z, class_id: int | None = None) -> np.ndarray:
    z = np.asarray(z, dtype=gen.dtype).reshape(-1)
    if z.shape[0] != gen.config.z_dim:
        raise ArgumentError(
            f"map_latent: expected z of length {gen.config.z_dim}, got {z.shape[0]}"
        )
    with tz.no_grad():
        w = _mapping_t(gen, Tensor(z.reshape(-1, 1)), class_id)
    return w.data.reshape(-1).copy()


def affine_from_w(gen: Generator, w) -> AffineParams:
    w = np.asarray(w, dtype=gen.dtype).reshape(-1)
    if w.shape[0] != gen.config.w_dim:
        raise ArgumentError(
            f"affine_from_w: expected w of length {gen.config.w_dim}, got {w.shape[0]}"
        )
    with tz.no_grad():
        mats = _affine_heads_t(gen, Tensor(w.reshape(-1, 1)))
    return AffineParams(np.stack([m.data for m in mats]))


def render_columns(gen: Generator, affine: AffineParams, coords: np.ndarray) -> np.ndarray:
    """RGB values (3, P) for an arbitrary set of coordinate columns.

    Column p of the result depends only on column p of ``coords``,
    bit-exactly: rendering any subset of a grid's columns reproduces the
    corresponding slice of the full render.
    """
    with tz.no_grad():
        out, _ = _synthesis_t(gen, _affine_tensors(gen, affine), _coords_tensor(gen, coords))
    return out.data


def synthesize(gen: Generator, affine: AffineParams, grid: CoordinateGrid) -> ImageBuffer:
    return ImageBuffer.from_matrix(render_columns(gen, affine, grid.matrix),
                                   grid.height, grid.width)


def level_features(gen: Generator, affine: AffineParams, grid: CoordinateGrid,
                   level: int) -> np.ndarray:
    """Feature matrix (H*W, n) produced at one synthesis level."""
    level = int(level)
    if not 0 <= level < gen.config.levels:
        raise ArgumentError(f"level_features: level {level} outside [0, {gen.config.levels})")
    with tz.no_grad():
        _, feats = _synthesis_t(gen, _affine_tensors(gen, affine),
                                _coords_tensor(gen, grid.matrix), collect=True)
    return feats[level].data.T.copy()


def latent_to_affine(gen: Generator, z, class_id: int | None = None) -> AffineParams:
    return affine_from_w(gen, map_latent(gen, z, class_id))


def sample(gen: Generator, z, class_id: int | None, height: int, width: int) -> ImageBuffer:
    """Render from a latent on the unit grid: the full three-step pipeline."""
    height, width = int(height), int(width)
    if height < 1 or width < 1:
        raise ArgumentError(f"sample: bad size {height}x{width}")
    affine = latent_to_affine(gen, z, class_id)
    return synthesize(gen, affine, make_grid(height, width, dtype=gen.dtype))


def random_latent(rng: np.random.Generator, config: GeneratorConfig) -> np.ndarray:
    return rng.standard_normal(config.z_dim)
