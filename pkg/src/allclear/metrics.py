"""PSNR and SSIM on [0,1] float images, plus the evaluation report record."""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ShapeError

PSNR_CAP_DB = 100.0
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])  # ITU-R 601

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_image(img, name):
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim not in (2, 3):
        raise ShapeError(f"{name}: expected (H, W) or (H, W, C), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name}: contains non-finite values")
    if arr.min() < -1e-6 or arr.max() > 1 + 1e-6:
        raise ValueError(
            f"{name}: values outside [0, 1] (min {arr.min():.4g}, max {arr.max():.4g})"
        )
    return arr


def luma(img):
    """ITU-R 601 luma of an (H, W, 3) image; 2-D inputs pass through."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        return arr
    return arr @ LUMA_WEIGHTS


def psnr(a, b):
    """Peak signal-to-noise ratio in dB, capped at 100 for identical images."""
    a = _check_image(a, "a")
    b = _check_image(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"psnr: shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(1.0 / mse))


def _gaussian_kernel(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    offsets = np.arange(size) - (size - 1) / 2.0
    kernel = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    return kernel / kernel.sum()


def _windowed(x, kernel):
    half = len(kernel) // 2
    y = correlate1d(x, kernel, axis=0, mode="constant")
    y = correlate1d(y, kernel, axis=1, mode="constant")
    return y[half:-half, half:-half]


def ssim(a, b):
    """Single-scale SSIM on luma; 11x11 Gaussian window (sigma 1.5),
    K1=0.01, K2=0.03, averaged over valid window positions only."""
    a = _check_image(a, "a")
    b = _check_image(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"ssim: shapes differ: {a.shape} vs {b.shape}")
    ya, yb = luma(a), luma(b)
    if min(ya.shape) < SSIM_WINDOW:
        raise ShapeError(
            f"ssim: image {ya.shape} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    kernel = _gaussian_kernel()
    mu_a = _windowed(ya, kernel)
    mu_b = _windowed(yb, kernel)
    var_a = _windowed(ya * ya, kernel) - mu_a ** 2
    var_b = _windowed(yb * yb, kernel) - mu_b ** 2
    cov = _windowed(ya * yb, kernel) - mu_a * mu_b
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    ssim_map = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    )
    return float(ssim_map.mean())


@dataclass
class WeatherMetrics:
    psnr: float
    ssim: float
    baseline_psnr: float
    baseline_ssim: float
    count: int


@dataclass
class MetricsReport:
    """Per-weather restoration metrics plus the degraded-input baseline."""

    weathers: dict = field(default_factory=dict)  # tag -> WeatherMetrics
    config_hash: str = ""

    def mean_psnr(self):
        return float(np.mean([m.psnr for m in self.weathers.values()]))

    def mean_ssim(self):
        return float(np.mean([m.ssim for m in self.weathers.values()]))

    def to_dict(self):
        return {
            "config_hash": self.config_hash,
            "weathers": {tag: asdict(m) for tag, m in self.weathers.items()},
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            weathers={
                tag: WeatherMetrics(**vals) for tag, vals in data["weathers"].items()
            },
            config_hash=data.get("config_hash", ""),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self):
        lines = ["weather,count,psnr,ssim,baseline_psnr,baseline_ssim"]
        for tag, m in self.weathers.items():
            lines.append(
                f"{tag},{m.count},{m.psnr:.4f},{m.ssim:.4f},"
                f"{m.baseline_psnr:.4f},{m.baseline_ssim:.4f}"
            )
        return "\n".join(lines) + "\n"

    def save(self, base_path):
        """Write <base>.json and <base>.csv; returns the JSON path."""
        json_path = f"{base_path}.json"
        with open(json_path, "w") as out:
            out.write(self.to_json())
        with open(f"{base_path}.csv", "w") as out:
            out.write(self.to_csv())
        return json_path
