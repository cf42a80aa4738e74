"""Amplitude statistics, amplitude swapping, and feature dumps.

The radial log-amplitude profile is the workhorse: the orthonormal 2-D
spectrum amplitude, channel-averaged, log-compressed, and binned by
normalized radial frequency. Weather types leave distinct signatures in
it (haze suppresses high frequencies, rain and snow add them), which the
nearest-centroid separability check exploits.
"""

from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import ConfigError, DataError
from ..metrics import psnr
from ..network import FEATURE_LAYERS
from ..spectral import amplitude_swap
from .evaluate import pad_to_multiple, to_image, to_tensor

LOG_EPS = 1e-8
DEFAULT_BINS = 64
IMAGE_LAYER = "image"


def _bin_indices(h, w, bins):
    fy = np.fft.fftfreq(h)
    fx = np.fft.fftfreq(w)
    radius = np.sqrt(fy[:, None] ** 2 + fx[None, :] ** 2)
    r_max = np.sqrt(0.5)  # both axes at Nyquist
    idx = np.minimum((radius / r_max * bins).astype(int), bins - 1)
    return idx


def radial_log_amplitude(image, bins=DEFAULT_BINS):
    """Radial profile of the log spectrum amplitude.

    Accepts (H, W) or (H, W, C) arrays; channels are averaged after the
    amplitude is taken. Returns a length-``bins`` vector with NaN in radial
    bins the frequency lattice never hits.
    """
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[..., None]
    h, w = arr.shape[:2]
    amp = np.abs(np.fft.fft2(arr, axes=(0, 1), norm="ortho")).mean(axis=2)
    log_amp = np.log(amp + LOG_EPS)
    idx = _bin_indices(h, w, bins).ravel()
    sums = np.bincount(idx, weights=log_amp.ravel(), minlength=bins)
    counts = np.bincount(idx, minlength=bins)
    profile = np.full(bins, np.nan)
    hit = counts > 0
    profile[hit] = sums[hit] / counts[hit]
    return profile


def bin_centers(bins=DEFAULT_BINS):
    """Normalized radial frequency at each bin center, in [0, 1]."""
    return (np.arange(bins) + 0.5) / bins


@dataclass
class AmpStats:
    """Per-weather mean/std of degraded-minus-clean radial profiles."""

    bins: int
    radii: np.ndarray
    mean: dict    # weather -> (bins,) array
    std: dict
    counts: dict  # weather -> int

    def to_rows(self):
        rows = []
        for weather in sorted(self.mean):
            m, s = self.mean[weather], self.std[weather]
            for b in range(self.bins):
                if np.isnan(m[b]):
                    continue
                rows.append((weather, b, float(self.radii[b]), float(m[b]), float(s[b])))
        return rows

    def to_csv(self):
        lines = ["weather,bin,radius,mean_log_amp_delta,std"]
        for weather, b, radius, mean, std in self.to_rows():
            lines.append(f"{weather},{b},{radius:.6f},{mean:.6f},{std:.6f}")
        return "\n".join(lines) + "\n"


def amp_stats(dataset, n=None, bins=DEFAULT_BINS):
    """Mean radial log-amplitude change (degraded minus clean) per weather."""
    grouped = {}
    for sample in dataset:
        grouped.setdefault(sample.weather, []).append(sample)
    if not grouped:
        raise DataError("amp_stats: empty dataset")
    if n is not None:
        short = {w: len(s) for w, s in grouped.items() if len(s) < n}
        if short:
            raise DataError(f"amp_stats: fewer than {n} samples for {short}")
        grouped = {w: s[:n] for w, s in grouped.items()}
    mean, std, counts = {}, {}, {}
    for weather, samples in grouped.items():
        profiles = np.stack(
            [
                radial_log_amplitude(s.degraded, bins) - radial_log_amplitude(s.clean, bins)
                for s in samples
            ]
        )
        mean[weather] = profiles.mean(axis=0)
        std[weather] = profiles.std(axis=0)
        counts[weather] = len(samples)
    return AmpStats(bins=bins, radii=bin_centers(bins), mean=mean, std=std, counts=counts)


def degraded_profiles(dataset, bins=DEFAULT_BINS):
    """(profiles, tags) for the degraded image of every sample."""
    profiles = np.stack([radial_log_amplitude(s.degraded, bins) for s in dataset])
    tags = [s.weather for s in dataset]
    return profiles, tags


@dataclass
class SeparabilityResult:
    accuracy: float
    per_class: dict
    n_test: int


def nearest_centroid_accuracy(train_profiles, train_tags, test_profiles, test_tags):
    """3-way nearest-centroid classification on radial profiles."""
    classes = sorted(set(train_tags))
    valid = ~np.isnan(train_profiles).any(axis=0) & ~np.isnan(test_profiles).any(axis=0)
    train_x = train_profiles[:, valid]
    test_x = test_profiles[:, valid]
    tags = np.asarray(train_tags)
    centroids = np.stack([train_x[tags == c].mean(axis=0) for c in classes])
    dists = np.linalg.norm(test_x[:, None, :] - centroids[None, :, :], axis=2)
    preds = [classes[j] for j in dists.argmin(axis=1)]
    hits = {c: 0 for c in classes}
    totals = {c: 0 for c in classes}
    for pred, actual in zip(preds, test_tags):
        totals[actual] += 1
        hits[actual] += pred == actual
    per_class = {c: hits[c] / totals[c] for c in classes if totals[c]}
    accuracy = sum(hits.values()) / len(test_tags)
    return SeparabilityResult(accuracy=accuracy, per_class=per_class, n_test=len(test_tags))


def amplitude_separability(train_dataset, test_dataset, bins=DEFAULT_BINS):
    """Nearest-centroid weather classification from degraded images alone."""
    train_x, train_tags = degraded_profiles(train_dataset, bins)
    test_x, test_tags = degraded_profiles(test_dataset, bins)
    return nearest_centroid_accuracy(train_x, train_tags, test_x, test_tags)


@dataclass
class AmpSwapResult:
    """Amplitude-swapped reconstructions of one degraded/clean pair.

    ``images`` holds unclamped float arrays keyed by name; the PSNR table is
    computed against the clean image after clamping to [0, 1].
    """

    images: dict
    psnr_table: dict


def amp_swap(degraded, clean):
    d = to_tensor(degraded)[0]
    c = to_tensor(clean)[0]
    clean_amp_img, degraded_amp_img = amplitude_swap(d, c)
    images = {
        "degraded": np.asarray(degraded, dtype=np.float32),
        "clean": np.asarray(clean, dtype=np.float32),
        "clean_amplitude": to_image(clean_amp_img.unsqueeze(0)),
        "degraded_amplitude": to_image(degraded_amp_img.unsqueeze(0)),
    }
    clamp = lambda img: np.clip(img, 0.0, 1.0)
    psnr_table = {
        "degraded": psnr(clamp(images["degraded"]), images["clean"]),
        "clean_amplitude": psnr(clamp(images["clean_amplitude"]), images["clean"]),
        "degraded_amplitude": psnr(clamp(images["degraded_amplitude"]), images["clean"]),
    }
    return AmpSwapResult(images=images, psnr_table=psnr_table)


@dataclass
class FeatureDump:
    """Per-sample pooled feature vectors and spectral amplitude profiles."""

    layer: str
    features: np.ndarray    # (N, C) channel-pooled activations
    amplitudes: np.ndarray  # (N, bins) radial log-amplitude profiles
    tags: list = field(default_factory=list)

    def save(self, path):
        np.savez(
            path,
            layer=self.layer,
            features=self.features,
            amplitudes=self.amplitudes,
            tags=np.array(self.tags),
        )
        return path


def dump_features(model, dataset, layer, bins=DEFAULT_BINS):
    """Extract per-sample features at a named stage for external projection.

    ``layer`` is one of the network stage names or "image" (the degraded
    input itself, no model needed). Features are spatially pooled per
    channel; amplitudes are radial log-amplitude profiles of the same
    activation.
    """
    known = FEATURE_LAYERS + (IMAGE_LAYER,)
    if layer not in known:
        raise ConfigError(f"unknown layer {layer!r}; expected one of {known}")
    if not dataset:
        raise DataError("dump_features: empty dataset")
    features, amplitudes, tags = [], [], []
    for sample in dataset:
        if layer == IMAGE_LAYER:
            act = np.asarray(sample.degraded, dtype=np.float64)
            features.append(act.mean(axis=(0, 1)))
            amplitudes.append(radial_log_amplitude(act, bins))
        else:
            if model is None:
                raise ConfigError(f"layer {layer!r} requires a model checkpoint")
            tensor, _ = pad_to_multiple(to_tensor(sample.degraded), 2 ** model.config.scales)
            with torch.no_grad():
                _, acts = model.forward_with_features(tensor)
            act = acts[layer][0].cpu().numpy()  # (C, H, W)
            features.append(act.mean(axis=(1, 2)))
            amplitudes.append(radial_log_amplitude(act.transpose(1, 2, 0), bins))
        tags.append(sample.weather)
    return FeatureDump(
        layer=layer,
        features=np.stack(features),
        amplitudes=np.stack(amplitudes),
        tags=tags,
    )
