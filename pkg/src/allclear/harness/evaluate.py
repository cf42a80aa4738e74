"""Full-image restoration and per-weather metric aggregation."""

import hashlib

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import DataError
from ..metrics import MetricsReport, WeatherMetrics, psnr, ssim


def to_tensor(image):
    """(H, W, 3) float image -> (1, 3, H, W) float32 tensor."""
    arr = np.asarray(image, dtype=np.float32)
    return torch.from_numpy(arr).permute(2, 0, 1).unsqueeze(0).contiguous()


def to_image(tensor):
    """(1, 3, H, W) or (3, H, W) tensor -> (H, W, 3) float32 array."""
    if tensor.dim() == 4:
        tensor = tensor[0]
    return tensor.detach().permute(1, 2, 0).cpu().numpy().astype(np.float32)


def pad_to_multiple(tensor, multiple=8):
    """Reflect-pad the spatial dims up to the next multiple; returns (t, (h, w))."""
    h, w = tensor.shape[-2:]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph or pw:
        if ph >= h or pw >= w:
            raise DataError(f"image {h}x{w} too small to pad to a multiple of {multiple}")
        tensor = F.pad(tensor, (0, pw, 0, ph), mode="reflect")
    return tensor, (h, w)


def restore_tensor(model, batch):
    """Run the model on a (B, 3, H, W) batch of arbitrary size; clamp to [0, 1]."""
    multiple = 2 ** model.config.scales
    padded, (h, w) = pad_to_multiple(batch, multiple)
    with torch.no_grad():
        out = model(padded)
    return out[..., :h, :w].clamp(0.0, 1.0)


def restore_image(model, image):
    """Restore one (H, W, 3) image; returns a float32 array in [0, 1]."""
    return to_image(restore_tensor(model, to_tensor(image)))


def evaluate(model, dataset, batch_size=8):
    """Per-weather mean PSNR/SSIM of restored images and of the raw inputs."""
    if not dataset:
        raise DataError("evaluate: empty dataset")
    by_weather = {}
    model_was_training = model.training
    model.eval()
    try:
        i = 0
        while i < len(dataset):
            # batch together consecutive samples of identical size
            chunk = [dataset[i]]
            while (
                len(chunk) < batch_size
                and i + len(chunk) < len(dataset)
                and dataset[i + len(chunk)].degraded.shape == chunk[0].degraded.shape
            ):
                chunk.append(dataset[i + len(chunk)])
            batch = torch.stack([to_tensor(s.degraded)[0] for s in chunk])
            restored = restore_tensor(model, batch)
            for sample, out in zip(chunk, restored):
                out_img = to_image(out)
                stats = by_weather.setdefault(sample.weather, [])
                stats.append(
                    (
                        psnr(out_img, sample.clean),
                        ssim(out_img, sample.clean),
                        psnr(sample.degraded, sample.clean),
                        ssim(sample.degraded, sample.clean),
                    )
                )
            i += len(chunk)
    finally:
        if model_was_training:
            model.train()
    config_hash = hashlib.sha256(model.config.to_json().encode("utf-8")).hexdigest()[:16]
    report = MetricsReport(config_hash=config_hash)
    for weather in sorted(by_weather):
        rows = np.array(by_weather[weather])
        report.weathers[weather] = WeatherMetrics(
            psnr=float(rows[:, 0].mean()),
            ssim=float(rows[:, 1].mean()),
            baseline_psnr=float(rows[:, 2].mean()),
            baseline_ssim=float(rows[:, 3].mean()),
            count=len(rows),
        )
    return report
