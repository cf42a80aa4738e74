"""Orthonormal 2-D Fourier transforms over spatial dimensions.

All functions act on the last two dimensions of a tensor, so (H, W),
(C, H, W) and (B, C, H, W) layouts work alike. Forward and inverse are
both scaled by 1/sqrt(H*W), making the pair unitary: Parseval's identity
holds and round trips are lossless up to floating-point noise.
"""

import threading

import torch

from .errors import ShapeError


class ImagResidueTracker:
    """Running record of the imaginary residue discarded by :func:`ifft2`.

    Learned spectral mixing produces spectra without exact conjugate
    symmetry, so their inverse transform is complex; only the real part
    is kept and the largest discarded magnitude is recorded here.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.last = 0.0
        self.max = 0.0

    def record(self, value):
        with self._lock:
            self.last = value
            if value > self.max:
                self.max = value

    def reset(self):
        with self._lock:
            self.last = 0.0
            self.max = 0.0


imag_residue = ImagResidueTracker()


def fft2(x):
    """Orthonormal 2-D DFT of a real tensor over its last two dimensions."""
    if not torch.isfinite(x).all():
        raise ValueError("fft2: input contains non-finite values")
    return torch.fft.fft2(x, norm="ortho")


def ifft2(s):
    """Real part of the orthonormal inverse DFT over the last two dimensions.

    The imaginary residue is discarded; its peak magnitude is tracked in
    the module-level ``imag_residue`` diagnostic.
    """
    if not torch.isfinite(torch.view_as_real(s)).all():
        raise ValueError("ifft2: input contains non-finite values")
    y = torch.fft.ifft2(s, norm="ortho")
    with torch.no_grad():
        imag_residue.record(y.imag.abs().max().item())
    return y.real


def decompose(s):
    """Split a complex spectrum into (amplitude, phase).

    Phase is atan2(imag, real) in (-pi, pi]; zero bins get phase 0.
    """
    return torch.abs(s), torch.angle(s)


def recombine(amplitude, phase):
    """Rebuild a complex spectrum from a non-negative amplitude and a phase."""
    if (amplitude < 0).any():
        raise ValueError("recombine: amplitude must be non-negative")
    return torch.polar(amplitude, phase)


def amplitude_swap(a, b):
    """Swap the Fourier amplitudes of two equally shaped real tensors.

    Returns ``(amp(b) with phase(a), amp(a) with phase(b))``, both mapped
    back to the spatial domain. Outputs are left unclamped; clamp to the
    display range only when writing image files.
    """
    if a.shape != b.shape:
        raise ShapeError(
            f"amplitude_swap: shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}"
        )
    amp_a, phase_a = decompose(fft2(a))
    amp_b, phase_b = decompose(fft2(b))
    return (
        ifft2(recombine(amp_b, phase_a)),
        ifft2(recombine(amp_a, phase_b)),
    )
