from .ablate import AblationRow, run_ablations
from .analyze import (
    AmpStats,
    amp_stats,
    amp_swap,
    amplitude_separability,
    dump_features,
    radial_log_amplitude,
)
from .config import TrainConfig, describe_config, format_config, load_config, parse_config, with_overrides
from .evaluate import evaluate, restore_image
from .infer import infer_file, load_image, save_image
from .train import RunLog, StepRecord, build_training_data, lr_at, train

__all__ = [
    "AblationRow",
    "AmpStats",
    "RunLog",
    "StepRecord",
    "TrainConfig",
    "amp_stats",
    "amp_swap",
    "amplitude_separability",
    "build_training_data",
    "describe_config",
    "dump_features",
    "evaluate",
    "format_config",
    "infer_file",
    "load_config",
    "load_image",
    "lr_at",
    "parse_config",
    "radial_log_amplitude",
    "restore_image",
    "run_ablations",
    "save_image",
    "train",
    "with_overrides",
]
