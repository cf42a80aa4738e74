"""Three-scale encoder/decoder restoration network built from the core blocks."""

import json
from dataclasses import asdict, dataclass, fields

import torch
import torch.nn as nn

from .blocks import ContentReconstructor, DegradationRemover, ResidualDenseBlock, init_weights
from .errors import ConfigError, ShapeError

FEATURE_LAYERS = (
    "encoder1", "encoder2", "encoder3",
    "bottleneck",
    "decoder1", "decoder2", "decoder3",
)


@dataclass(frozen=True)
class NetConfig:
    """Architecture hyperparameters; serializes losslessly through JSON.

    ``amplitude_guidance``, ``subtract_mean_amplitude`` and
    ``spectral_content`` are the ablation switches: the first removes the
    channel gate, the second feeds the gate the raw amplitude, the third
    swaps every content-reconstruction block for a plain dense block.
    """

    base_channels: int = 16
    scales: int = 3
    rdb_depth: int = 4
    reduction: int = 4
    use_global_residual: bool = True
    amplitude_guidance: bool = True
    subtract_mean_amplitude: bool = True
    spectral_content: bool = True

    def validate(self):
        if self.base_channels < 1:
            raise ConfigError(f"base_channels must be >= 1, got {self.base_channels}")
        if self.scales != 3:
            raise ConfigError(f"the architecture is fixed at 3 scales, got {self.scales}")
        if self.rdb_depth < 1:
            raise ConfigError(f"rdb_depth must be >= 1, got {self.rdb_depth}")
        if self.reduction < 1:
            raise ConfigError(f"reduction must be >= 1, got {self.reduction}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown NetConfig fields: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def reference_scale():
    """Full-size config, calibrated to the published 11.2M parameter budget."""
    return NetConfig(base_channels=30)


class Stage(nn.Module):
    """Degradation removal followed by content reconstruction, one scale."""

    def __init__(self, width, cfg):
        super().__init__()
        self.remove = DegradationRemover(
            width,
            reduction=cfg.reduction,
            amplitude_guidance=cfg.amplitude_guidance,
            subtract_mean_amplitude=cfg.subtract_mean_amplitude,
        )
        if cfg.spectral_content:
            self.reconstruct = ContentReconstructor(width, rdb_depth=cfg.rdb_depth)
        else:
            self.reconstruct = ResidualDenseBlock(width, depth=cfg.rdb_depth)

    def forward(self, x):
        return self.reconstruct(self.remove(x))


class RestorationNet(nn.Module):
    """U-shaped restorer: per-scale stages, strided down/up sampling, skips.

    Input and output are (B, 3, H, W) images with H and W divisible by
    2**scales (= 8). With ``use_global_residual`` the network predicts a
    correction that is added to the input image.
    """

    def __init__(self, config=None):
        super().__init__()
        if config is None:
            config = NetConfig()
        config.validate()
        self.config = config
        widths = [config.base_channels * 2 ** i for i in range(config.scales)]
        bottom = config.base_channels * 2 ** config.scales

        self.head = nn.Conv2d(3, widths[0], 3, padding=1)
        self.encoders = nn.ModuleList(Stage(w, config) for w in widths)
        self.downs = nn.ModuleList(
            nn.Conv2d(w, 2 * w, 3, stride=2, padding=1) for w in widths
        )
        self.bottleneck = Stage(bottom, config)
        self.ups = nn.ModuleList(
            nn.ConvTranspose2d(2 * w, w, 2, stride=2) for w in widths
        )
        self.merges = nn.ModuleList(nn.Conv2d(2 * w, w, 1) for w in widths)
        self.decoders = nn.ModuleList(Stage(w, config) for w in widths)
        self.tail = nn.Conv2d(widths[0], 3, 3, padding=1)
        self.apply(init_weights)

    def forward(self, image):
        out, _ = self._run(image, collect=False)
        return out

    def forward_with_features(self, image):
        """Forward pass that also returns the per-stage activations by name."""
        return self._run(image, collect=True)

    def _run(self, image, collect):
        if image.dim() != 4 or image.shape[1] != 3:
            raise ShapeError(f"expected (B, 3, H, W) input, got {tuple(image.shape)}")
        multiple = 2 ** self.config.scales
        h, w = image.shape[-2:]
        if h % multiple or w % multiple:
            raise ShapeError(
                f"H and W must be divisible by {multiple} (got {h}x{w}); pad the input"
            )
        features = {}
        x = self.head(image)
        skips = []
        for i, (enc, down) in enumerate(zip(self.encoders, self.downs)):
            x = enc(x)
            skips.append(x)
            if collect:
                features[f"encoder{i + 1}"] = x
            x = down(x)
        x = self.bottleneck(x)
        if collect:
            features["bottleneck"] = x
        for i in reversed(range(self.config.scales)):
            x = self.ups[i](x)
            x = self.merges[i](torch.cat([x, skips[i]], dim=1))
            x = self.decoders[i](x)
            if collect:
                features[f"decoder{i + 1}"] = x
        pred = self.tail(x)
        if self.config.use_global_residual:
            pred = image + pred
        return pred, features


def build_model(config=None):
    return RestorationNet(config)


def count_params(module):
    """Number of trainable scalar parameters in a module."""
    return sum(p.numel() for p in module.parameters() if p.requires_grad)
