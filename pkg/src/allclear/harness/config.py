"""Flat key=value run configuration.

The file format is one ``key = value`` per line; ``#`` starts a comment
and blank lines are ignored. Unknown keys are rejected. Every key, its
type and default live in the KEYS table below, which also drives the
documentation printed by ``describe_config()``.
"""

import hashlib
from dataclasses import dataclass, fields, replace

from ..errors import ConfigError
from ..losses import LossWeights
from ..network import NetConfig
from ..synthdata import DegradeParams, HazeParams, RainParams, SnowParams


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (type, default, doc)
KEYS = {
    # architecture
    "base_channels": (int, 16, "channel width at the finest scale (doubles per scale)"),
    "rdb_depth": (int, 4, "dense conv layers inside each residual dense block"),
    "reduction": (int, 4, "channel-gate MLP reduction ratio"),
    "use_global_residual": (bool, True, "predict a correction added to the input image"),
    "amplitude_guidance": (bool, True, "enable the amplitude-driven channel gate"),
    "subtract_mean_amplitude": (bool, True, "subtract the channel-mean amplitude before gating"),
    "spectral_content": (bool, True, "use the Fourier content block (false: dense block only)"),
    # loss weights
    "lambda_mae": (float, 1.0, "weight of the pixel MAE loss"),
    "lambda_fft": (float, 1.0, "weight of the spectral MAE loss"),
    "lambda_dm": (float, 1.0, "weight of the residual-direction loss"),
    # optimization
    "batch_size": (int, 8, "patches per optimization step"),
    "patch_size": (int, 64, "square crop size; must be divisible by 8"),
    "total_steps": (int, 2000, "number of optimization steps"),
    "lr_start": (float, 2e-4, "initial learning rate"),
    "lr_end": (float, 1e-6, "final learning rate of the cosine schedule"),
    # data
    "image_size": (int, 96, "side length of generated scenes"),
    "train_per_weather": (int, 1500, "training pairs generated per weather type"),
    "test_per_weather": (int, 150, "test pairs generated per weather type"),
    "train_data": (str, "", "optional folder dataset for training (overrides synthesis)"),
    "test_data": (str, "", "optional folder dataset for evaluation (overrides synthesis)"),
    "rain_density": (float, 0.004, "rain streaks per pixel"),
    "haze_t_min": (float, 0.45, "minimum haze transmission"),
    "haze_t_max": (float, 0.85, "maximum haze transmission"),
    "snow_density": (float, 0.0028, "snow flakes per pixel"),
    # run control
    "master_seed": (int, 0, "single seed from which all randomness derives"),
    "eval_interval": (int, 1000, "steps between mid-run evaluations (0: final only)"),
    "checkpoint_dir": (str, "runs/desk", "directory for checkpoints and logs"),
    "log_path": (str, "", "run-log JSON path (default: <checkpoint_dir>/runlog.json)"),
    "resume": (str, "", "checkpoint file to resume training from"),
}

_FIELD_TYPES = {key: spec[0] for key, spec in KEYS.items()}


@dataclass(frozen=True)
class TrainConfig:
    base_channels: int = KEYS["base_channels"][1]
    rdb_depth: int = KEYS["rdb_depth"][1]
    reduction: int = KEYS["reduction"][1]
    use_global_residual: bool = KEYS["use_global_residual"][1]
    amplitude_guidance: bool = KEYS["amplitude_guidance"][1]
    subtract_mean_amplitude: bool = KEYS["subtract_mean_amplitude"][1]
    spectral_content: bool = KEYS["spectral_content"][1]
    lambda_mae: float = KEYS["lambda_mae"][1]
    lambda_fft: float = KEYS["lambda_fft"][1]
    lambda_dm: float = KEYS["lambda_dm"][1]
    batch_size: int = KEYS["batch_size"][1]
    patch_size: int = KEYS["patch_size"][1]
    total_steps: int = KEYS["total_steps"][1]
    lr_start: float = KEYS["lr_start"][1]
    lr_end: float = KEYS["lr_end"][1]
    image_size: int = KEYS["image_size"][1]
    train_per_weather: int = KEYS["train_per_weather"][1]
    test_per_weather: int = KEYS["test_per_weather"][1]
    train_data: str = KEYS["train_data"][1]
    test_data: str = KEYS["test_data"][1]
    rain_density: float = KEYS["rain_density"][1]
    haze_t_min: float = KEYS["haze_t_min"][1]
    haze_t_max: float = KEYS["haze_t_max"][1]
    snow_density: float = KEYS["snow_density"][1]
    master_seed: int = KEYS["master_seed"][1]
    eval_interval: int = KEYS["eval_interval"][1]
    checkpoint_dir: str = KEYS["checkpoint_dir"][1]
    log_path: str = KEYS["log_path"][1]
    resume: str = KEYS["resume"][1]

    def validate(self):
        if not self.lr_start >= self.lr_end > 0:
            raise ConfigError(
                f"require lr_start >= lr_end > 0, got {self.lr_start} and {self.lr_end}"
            )
        if self.total_steps < 1:
            raise ConfigError(f"total_steps must be >= 1, got {self.total_steps}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patch_size < 8 or self.patch_size % 8 != 0:
            raise ConfigError(
                f"patch_size must be a positive multiple of 8, got {self.patch_size}"
            )
        if self.image_size < self.patch_size:
            raise ConfigError(
                f"image_size {self.image_size} smaller than patch_size {self.patch_size}"
            )
        if self.train_per_weather < 1 or self.test_per_weather < 1:
            raise ConfigError("per-weather sample counts must be >= 1")
        if self.eval_interval < 0:
            raise ConfigError(f"eval_interval must be >= 0, got {self.eval_interval}")
        self.net_config().validate()
        self.loss_weights()
        self.degrade_params()
        return self

    def net_config(self):
        return NetConfig(
            base_channels=self.base_channels,
            rdb_depth=self.rdb_depth,
            reduction=self.reduction,
            use_global_residual=self.use_global_residual,
            amplitude_guidance=self.amplitude_guidance,
            subtract_mean_amplitude=self.subtract_mean_amplitude,
            spectral_content=self.spectral_content,
        )

    def loss_weights(self):
        return LossWeights(mae=self.lambda_mae, fft=self.lambda_fft, dm=self.lambda_dm)

    def degrade_params(self):
        return DegradeParams(
            rain=RainParams(density=self.rain_density),
            haze=HazeParams(t_range=(self.haze_t_min, self.haze_t_max)),
            snow=SnowParams(density=self.snow_density),
        )

    def run_log_path(self):
        import os

        return self.log_path or os.path.join(self.checkpoint_dir, "runlog.json")

    def config_hash(self):
        return hashlib.sha256(format_config(self).encode("utf-8")).hexdigest()[:16]


def parse_config(text):
    """Parse flat key=value text into a validated TrainConfig."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        kind = _FIELD_TYPES[key]
        try:
            if kind is bool:
                values[key] = _parse_bool(value)
            elif kind is str:
                values[key] = value
            else:
                values[key] = kind(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return TrainConfig(**values).validate()


def load_config(path):
    try:
        with open(path) as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text)


def format_config(cfg):
    """Render a TrainConfig as key=value text; parse(format(cfg)) == cfg."""
    lines = []
    for f in fields(TrainConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            rendered = "true" if value else "false"
        else:
            rendered = repr(value) if isinstance(value, float) else str(value)
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"


def describe_config():
    """Documentation block listing every key, its type, default, and meaning."""
    lines = []
    for key, (kind, default, doc) in KEYS.items():
        lines.append(f"{key} ({kind.__name__}, default {default!r}): {doc}")
    return "\n".join(lines)


def with_overrides(cfg, **overrides):
    unknown = set(overrides) - set(KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return replace(cfg, **overrides).validate()
