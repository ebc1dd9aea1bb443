"""Coordinate-based polynomial image generator.

A generator built from linear maps and leaky rectifiers where per-level
elementwise products with affine-transformed pixel coordinates raise
the polynomial order of the image function. Ships with a minimal
autograd engine, desk-scale training loops, affine-space manipulation
tools, an HTTP service, and a CLI client.
"""

from .errors import (
    ArgumentError,
    DimensionError,
    EvaluationError,
    FormatError,
    PolypixError,
    StateError,
    TrainingError,
)
from .generator import (
    AffineParams,
    Generator,
    GeneratorConfig,
    affine_from_w,
    count_params,
    init_generator,
    latent_to_affine,
    level_features,
    map_latent,
    render_columns,
    sample,
    synthesize,
)
from .grid import CoordinateGrid, make_grid, nested_dense_grid
from .image import ImageBuffer, export_image, load_image
from .inversion import InversionConfig, invert
from .manipulation import (
    HeatMap,
    extrapolate,
    heatmap,
    interpolate,
    style_mix,
    upsample_render,
)
from .metrics import psnr, ssim
from .training import (
    AdamState,
    Discriminator,
    Schedule,
    Stage,
    adam_update,
    discriminator_forward,
    fit_single_image,
    init_discriminator,
    parse_schedule,
    train_adversarial,
)

__version__ = "0.1.0"
