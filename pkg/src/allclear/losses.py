"""Training losses: pixel MAE, spectral MAE, and the residual-direction loss."""

from dataclasses import dataclass

import torch

from . import spectral
from .errors import ConfigError, ShapeError

DM_EPS = 1e-8


@dataclass(frozen=True)
class LossWeights:
    mae: float = 1.0
    fft: float = 1.0
    dm: float = 1.0

    def __post_init__(self):
        for name in ("mae", "fft", "dm"):
            if getattr(self, name) < 0:
                raise ConfigError(f"loss weight {name} must be non-negative")


def _check_shapes(op, *tensors):
    shapes = {tuple(t.shape) for t in tensors}
    if len(shapes) > 1:
        raise ShapeError(f"{op}: shapes differ: {sorted(shapes)}")


def mae_loss(out, gt):
    """Mean absolute error over all elements."""
    _check_shapes("mae_loss", out, gt)
    return (gt - out).abs().mean()


def fft_loss(out, gt):
    """Mean absolute error over real and imaginary spectrum parts."""
    _check_shapes("fft_loss", out, gt)
    diff = spectral.fft2(gt) - spectral.fft2(out)
    return torch.view_as_real(diff).abs().mean()


def dm_loss(inp, out, gt, eps=DM_EPS):
    """One minus the cosine between output and ground-truth residuals.

    Residuals are taken against the degraded input and flattened per batch
    item; the batch mean is returned. A zero ground-truth residual (sample
    already clean) contributes 0.
    """
    _check_shapes("dm_loss", inp, out, gt)
    b = out.shape[0]
    r_out = (out - inp).reshape(b, -1)
    r_gt = (gt - inp).reshape(b, -1)
    dot = (r_out * r_gt).sum(dim=1)
    gt_norm = r_gt.norm(dim=1)
    denom = (r_out.norm(dim=1) * gt_norm).clamp_min(eps)
    per_item = 1.0 - dot / denom
    per_item = torch.where(gt_norm > 0, per_item, torch.zeros_like(per_item))
    return per_item.mean()


def total_loss(inp, out, gt, weights=LossWeights()):
    """Weighted sum of the three losses."""
    return (
        weights.mae * mae_loss(out, gt)
        + weights.fft * fft_loss(out, gt)
        + weights.dm * dm_loss(inp, out, gt)
    )
