"""Seeded synthetic weather degradations and the paired-dataset pipeline.

Every generator is a pure function of (clean, params, seed): randomness
comes from a Philox4x64 counter-based generator keyed directly with the
64-bit sample seed, so outputs are bit-identical across platforms and
call order. Per-sample seeds derive from the master seed via blake2b over
"<master>/<label>/<weather>/<index>".
"""

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ConfigError, DataError

WEATHER_TYPES = ("rain", "haze", "snow")


def derive_seed(master_seed, *labels):
    """64-bit sub-seed from the master seed and a label path (blake2b)."""
    text = "/".join([str(int(master_seed))] + [str(part) for part in labels])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _rng(seed):
    return np.random.Generator(np.random.Philox(key=seed))


@dataclass(frozen=True)
class RainParams:
    density: float = 0.004         # streaks per pixel
    length: tuple = (8.0, 16.0)    # px, sampled per image
    angle_deg: tuple = (60.0, 120.0)
    intensity: tuple = (0.35, 0.8)  # per-streak additive peak
    blur_sigma: float = 0.3

    def __post_init__(self):
        if self.density < 0:
            raise ConfigError("rain density must be non-negative")
        if not (1.0 <= self.length[0] <= self.length[1]):
            raise ConfigError(f"bad rain length range {self.length}")
        if not (0.0 <= self.intensity[0] <= self.intensity[1] <= 1.0):
            raise ConfigError(f"bad rain intensity range {self.intensity}")


@dataclass(frozen=True)
class HazeParams:
    # Atmospheric scattering: degraded = clean * t + airlight * (1 - t)
    t_range: tuple = (0.45, 0.85)
    airlight: tuple = (0.75, 1.0)
    grid: int = 3                  # coarse nodes per axis of the smooth t field

    def __post_init__(self):
        if not (0.0 < self.t_range[0] <= self.t_range[1] <= 1.0):
            raise ConfigError(f"transmission range must lie in (0, 1], got {self.t_range}")
        if not (0.6 <= self.airlight[0] <= self.airlight[1] <= 1.0):
            raise ConfigError(f"airlight range must lie in [0.6, 1.0], got {self.airlight}")
        if self.grid < 2:
            raise ConfigError("haze grid must be >= 2")


@dataclass(frozen=True)
class SnowParams:
    # Large soft flakes keep snow spectrally distinct from thin sharp rain
    # streaks: disc energy concentrates below ~0.6/radius cycles/px.
    density: float = 0.0028        # flakes per pixel
    radius: tuple = (2.5, 4.5)     # px
    opacity: tuple = (0.6, 1.0)
    brightness: tuple = (0.85, 1.0)
    rim: float = 1.5               # soft-edge width in px; core inside radius - rim

    def __post_init__(self):
        if self.density < 0:
            raise ConfigError("snow density must be non-negative")
        if not (0.5 <= self.radius[0] <= self.radius[1]):
            raise ConfigError(f"bad snow radius range {self.radius}")
        if not (0.0 <= self.opacity[0] <= self.opacity[1] <= 1.0):
            raise ConfigError(f"bad snow opacity range {self.opacity}")
        if not (0.0 <= self.brightness[0] <= self.brightness[1] <= 1.0):
            raise ConfigError(f"bad snow brightness range {self.brightness}")
        if self.rim <= 0:
            raise ConfigError(f"snow rim must be positive, got {self.rim}")


@dataclass(frozen=True)
class DegradeParams:
    rain: RainParams = field(default_factory=RainParams)
    haze: HazeParams = field(default_factory=HazeParams)
    snow: SnowParams = field(default_factory=SnowParams)

    def for_weather(self, weather):
        if weather not in WEATHER_TYPES:
            raise ConfigError(f"unknown weather type {weather!r}")
        return getattr(self, weather)


@dataclass
class WeatherSample:
    degraded: np.ndarray  # (H, W, 3) float32 in [0, 1]
    clean: np.ndarray
    weather: str
    seed: int


def _check_clean(clean):
    clean = np.asarray(clean, dtype=np.float32)
    if clean.ndim != 3 or clean.shape[2] != 3:
        raise DataError(f"clean image must be (H, W, 3), got {clean.shape}")
    if clean.min() < 0.0 or clean.max() > 1.0:
        raise DataError("clean image values must lie in [0, 1]")
    return clean


def random_scene(size, seed):
    """Procedural clean image: smooth gradient, soft shapes, faint texture."""
    rng = _rng(seed)
    h = w = int(size)
    yy, xx = np.meshgrid(
        np.linspace(0.0, 1.0, h), np.linspace(0.0, 1.0, w), indexing="ij"
    )
    corners = rng.uniform(0.05, 0.95, size=(2, 2, 3))
    img = (
        corners[0, 0] * ((1 - yy) * (1 - xx))[..., None]
        + corners[0, 1] * ((1 - yy) * xx)[..., None]
        + corners[1, 0] * (yy * (1 - xx))[..., None]
        + corners[1, 1] * (yy * xx)[..., None]
    )
    for _ in range(int(rng.integers(3, 9))):
        cy, cx = rng.uniform(0.0, 1.0, size=2)
        ry, rx = rng.uniform(0.08, 0.35, size=2)
        color = rng.uniform(0.0, 1.0, size=3)
        alpha = rng.uniform(0.5, 1.0)
        if rng.random() < 0.5:
            dist = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2
            mask = np.clip((1.0 - dist) / 0.2, 0.0, 1.0)
        else:
            dist = np.maximum(np.abs(yy - cy) / ry, np.abs(xx - cx) / rx)
            mask = np.clip((1.0 - dist) / 0.1, 0.0, 1.0)
        blend = (alpha * mask)[..., None]
        img = img * (1.0 - blend) + color * blend
    noise = rng.standard_normal((h, w))
    texture = ndimage.gaussian_filter(noise, rng.uniform(0.8, 2.5))
    texture *= rng.uniform(0.02, 0.07) / (texture.std() + 1e-8)
    img = img + texture[..., None]
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def _streak_kernel(length, angle_deg, blur_sigma):
    # Rasterize a centered line segment, blur it, normalize the peak to 1.
    size = int(length) | 1
    kernel = np.zeros((size, size), dtype=np.float64)
    center = size // 2
    theta = np.deg2rad(angle_deg)
    dy, dx = np.sin(theta), np.cos(theta)
    for t in np.linspace(-length / 2.0, length / 2.0, int(4 * length) + 1):
        y = center + t * dy
        x = center + t * dx
        y0, x0 = int(np.floor(y)), int(np.floor(x))
        fy, fx = y - y0, x - x0
        for oy, wy in ((0, 1 - fy), (1, fy)):
            for ox, wx in ((0, 1 - fx), (1, fx)):
                if 0 <= y0 + oy < size and 0 <= x0 + ox < size:
                    kernel[y0 + oy, x0 + ox] += wy * wx
    kernel = ndimage.gaussian_filter(kernel, blur_sigma)
    peak = kernel.max()
    if peak > 0:
        kernel /= peak
    return kernel


def gen_rain(clean, params, seed):
    """Additive bright streaks: seeded impulses blurred along one direction."""
    clean = _check_clean(clean)
    rng = _rng(seed)
    h, w = clean.shape[:2]
    n = int(round(params.density * h * w))
    if n == 0:
        return WeatherSample(clean.copy(), clean, "rain", seed)
    angle = rng.uniform(*params.angle_deg)
    length = rng.uniform(*params.length)
    ys = rng.integers(0, h, size=n)
    xs = rng.integers(0, w, size=n)
    peaks = rng.uniform(params.intensity[0], params.intensity[1], size=n)
    impulses = np.zeros((h, w), dtype=np.float64)
    np.add.at(impulses, (ys, xs), peaks)
    streaks = ndimage.convolve(
        impulses, _streak_kernel(length, angle, params.blur_sigma), mode="constant"
    )
    degraded = np.clip(clean + streaks[..., None], 0.0, 1.0).astype(np.float32)
    return WeatherSample(degraded, clean, "rain", seed)


def _smooth_field(nodes, h, w):
    g = nodes.shape[0]
    iy = np.linspace(0.0, g - 1.0, h)
    ix = np.linspace(0.0, g - 1.0, w)
    y0 = np.minimum(iy.astype(int), g - 2)
    x0 = np.minimum(ix.astype(int), g - 2)
    fy = (iy - y0)[:, None]
    fx = (ix - x0)[None, :]
    n00 = nodes[y0][:, x0]
    n01 = nodes[y0][:, x0 + 1]
    n10 = nodes[y0 + 1][:, x0]
    n11 = nodes[y0 + 1][:, x0 + 1]
    return (
        n00 * (1 - fy) * (1 - fx)
        + n01 * (1 - fy) * fx
        + n10 * fy * (1 - fx)
        + n11 * fy * fx
    )


def gen_haze(clean, params, seed):
    """Atmospheric scattering with a spatially smooth transmission field."""
    clean = _check_clean(clean)
    rng = _rng(seed)
    h, w = clean.shape[:2]
    t_lo, t_hi = params.t_range
    if t_lo == t_hi:
        # Constant field kept exact so t == 1 reproduces the clean image bitwise.
        t = np.full((h, w), t_lo, dtype=np.float32)
    else:
        nodes = rng.uniform(t_lo, t_hi, size=(params.grid, params.grid))
        t = _smooth_field(nodes, h, w).astype(np.float32)
    airlight = np.float32(rng.uniform(*params.airlight))
    degraded = clean * t[..., None] + airlight * (1.0 - t[..., None])
    return WeatherSample(degraded.astype(np.float32), clean, "haze", seed)


def gen_snow(clean, params, seed):
    """Alpha-composited near-white discs: hard core, linear rim falloff."""
    clean = _check_clean(clean)
    rng = _rng(seed)
    h, w = clean.shape[:2]
    n = int(round(params.density * h * w))
    degraded = clean.astype(np.float64).copy()
    if n > 0:
        cys = rng.uniform(0.0, h, size=n)
        cxs = rng.uniform(0.0, w, size=n)
        radii = rng.uniform(params.radius[0], params.radius[1], size=n)
        opacities = rng.uniform(params.opacity[0], params.opacity[1], size=n)
        shades = rng.uniform(params.brightness[0], params.brightness[1], size=n)
        for cy, cx, radius, opacity, shade in zip(cys, cxs, radii, opacities, shades):
            y0 = max(0, int(np.floor(cy - radius - 1)))
            y1 = min(h, int(np.ceil(cy + radius + 2)))
            x0 = max(0, int(np.floor(cx - radius - 1)))
            x1 = min(w, int(np.ceil(cx + radius + 2)))
            if y0 >= y1 or x0 >= x1:
                continue
            ys = np.arange(y0, y1)[:, None]
            xs = np.arange(x0, x1)[None, :]
            dist = np.sqrt((ys - cy) ** 2 + (xs - cx) ** 2)
            coverage = np.clip((radius - dist) / params.rim, 0.0, 1.0)
            blend = (opacity * coverage)[..., None]
            patch = degraded[y0:y1, x0:x1]
            degraded[y0:y1, x0:x1] = patch * (1.0 - blend) + shade * blend
    return WeatherSample(degraded.astype(np.float32), clean, "snow", seed)


GENERATORS = {"rain": gen_rain, "haze": gen_haze, "snow": gen_snow}


def make_dataset(n_per_weather, image_size, params=DegradeParams(), master_seed=0):
    """Equal counts of rain/haze/snow pairs on procedural clean scenes.

    Ordering is deterministic: all rain samples first, then haze, then snow,
    each in index order. Sample i of weather w depends only on
    (master_seed, w, i), so parallel construction gives identical results.
    """
    if n_per_weather < 1:
        raise ConfigError(f"n_per_weather must be >= 1, got {n_per_weather}")
    if image_size < 16:
        raise ConfigError(f"image_size must be >= 16, got {image_size}")
    samples = []
    for weather in WEATHER_TYPES:
        gen = GENERATORS[weather]
        wparams = params.for_weather(weather)
        for i in range(n_per_weather):
            clean = random_scene(image_size, derive_seed(master_seed, "scene", weather, i))
            samples.append(gen(clean, wparams, derive_seed(master_seed, "degrade", weather, i)))
    return samples


def sample_batch(dataset, batch_size, patch_size, seed):
    """Random aligned patch crops, sampled uniformly with replacement.

    Returns (degraded, clean, tags) with images stacked as
    (B, patch, patch, 3) float32 arrays; the same crop window is applied to
    both images of a pair.
    """
    if patch_size % 8 != 0:
        raise ConfigError(f"patch_size must be divisible by 8, got {patch_size}")
    if not dataset:
        raise DataError("sample_batch: empty dataset")
    rng = _rng(seed)
    indices = rng.integers(0, len(dataset), size=batch_size)
    inp = np.empty((batch_size, patch_size, patch_size, 3), dtype=np.float32)
    gt = np.empty_like(inp)
    tags = []
    for row, idx in enumerate(indices):
        sample = dataset[int(idx)]
        h, w = sample.clean.shape[:2]
        if patch_size > h or patch_size > w:
            raise ConfigError(
                f"patch_size {patch_size} exceeds image size {h}x{w}"
            )
        oy = int(rng.integers(0, h - patch_size + 1))
        ox = int(rng.integers(0, w - patch_size + 1))
        inp[row] = sample.degraded[oy:oy + patch_size, ox:ox + patch_size]
        gt[row] = sample.clean[oy:oy + patch_size, ox:ox + patch_size]
        tags.append(sample.weather)
    return inp, gt, tags


def _to_png_bytes(img):
    return np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_dataset(samples, out_dir, master_seed=None):
    """Write samples as 8-bit PNG pairs plus a JSON manifest.

    Layout: <out_dir>/<weather>/{input,gt}/<index>.png, pairs matched by
    filename. Returns the manifest path.
    """
    from PIL import Image

    os.makedirs(out_dir, exist_ok=True)
    entries = []
    counters = {w: 0 for w in WEATHER_TYPES}
    for sample in samples:
        idx = counters[sample.weather]
        counters[sample.weather] += 1
        name = f"{idx:05d}.png"
        rel_in = os.path.join(sample.weather, "input", name)
        rel_gt = os.path.join(sample.weather, "gt", name)
        for rel, img in ((rel_in, sample.degraded), (rel_gt, sample.clean)):
            path = os.path.join(out_dir, rel)
            os.makedirs(os.path.dirname(path), exist_ok=True)
            Image.fromarray(_to_png_bytes(img)).save(path)
        entries.append(
            {"weather": sample.weather, "seed": sample.seed, "input": rel_in, "gt": rel_gt}
        )
    manifest = {
        "format": 1,
        "master_seed": master_seed,
        "count_per_weather": counters,
        "samples": entries,
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w") as out:
        json.dump(manifest, out, indent=2)
    return manifest_path


def load_folder_dataset(root):
    """Load paired 8-bit PNGs from <root>/<weather>/{input,gt}/<name>.png."""
    from PIL import Image

    if not os.path.isdir(root):
        raise DataError(f"dataset folder not found: {root}")
    samples = []
    found_any = False
    for weather in WEATHER_TYPES:
        in_dir = os.path.join(root, weather, "input")
        gt_dir = os.path.join(root, weather, "gt")
        if not os.path.isdir(in_dir):
            continue
        if not os.path.isdir(gt_dir):
            raise DataError(f"{weather}: input/ present but gt/ missing under {root}")
        found_any = True
        for name in sorted(os.listdir(in_dir)):
            gt_path = os.path.join(gt_dir, name)
            if not os.path.exists(gt_path):
                raise DataError(f"{weather}/{name}: no matching ground-truth image")
            degraded = _load_png(Image, os.path.join(in_dir, name))
            clean = _load_png(Image, gt_path)
            if degraded.shape != clean.shape:
                raise DataError(f"{weather}/{name}: input/gt shapes differ")
            samples.append(
                WeatherSample(degraded, clean, weather, derive_seed(0, "file", weather, name))
            )
    if not found_any:
        raise DataError(f"no <weather>/input directories under {root}")
    if not samples:
        raise DataError(f"no image pairs under {root}")
    return samples


def _load_png(Image, path):
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    except OSError as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc
    return arr
