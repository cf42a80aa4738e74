"""All-weather image restoration in the frequency domain.

Degradation removal is channel-dependent and guided by Fourier amplitude
statistics; content reconstruction is channel-independent and globally
Fourier-mixed. Ships with synthetic rain/haze/snow data, a training and
analysis harness, a CLI, and an HTTP service.
"""

__version__ = "0.1.0"

from .errors import (
    CheckpointCorruptError,
    CheckpointError,
    CheckpointMissingTensorError,
    CheckpointVersionError,
    ConfigError,
    ConfigMismatchError,
    DataError,
    NumericAbort,
    ShapeError,
)
from .losses import LossWeights, dm_loss, fft_loss, mae_loss, total_loss
from .metrics import MetricsReport, WeatherMetrics, psnr, ssim
from .network import NetConfig, RestorationNet, build_model, count_params, reference_scale
from .spectral import amplitude_swap, decompose, fft2, ifft2, recombine
from .synthdata import (
    DegradeParams,
    HazeParams,
    RainParams,
    SnowParams,
    WeatherSample,
    derive_seed,
    gen_haze,
    gen_rain,
    gen_snow,
    load_folder_dataset,
    make_dataset,
    sample_batch,
    save_dataset,
)

__all__ = [
    "CheckpointCorruptError",
    "CheckpointError",
    "CheckpointMissingTensorError",
    "CheckpointVersionError",
    "ConfigError",
    "ConfigMismatchError",
    "DataError",
    "DegradeParams",
    "HazeParams",
    "LossWeights",
    "MetricsReport",
    "NetConfig",
    "NumericAbort",
    "RainParams",
    "RestorationNet",
    "ShapeError",
    "SnowParams",
    "WeatherMetrics",
    "WeatherSample",
    "amplitude_swap",
    "build_model",
    "count_params",
    "decompose",
    "derive_seed",
    "dm_loss",
    "fft2",
    "fft_loss",
    "gen_haze",
    "gen_rain",
    "gen_snow",
    "ifft2",
    "load_folder_dataset",
    "mae_loss",
    "make_dataset",
    "reference_scale",
    "psnr",
    "recombine",
    "sample_batch",
    "save_dataset",
    "ssim",
    "total_loss",
]
