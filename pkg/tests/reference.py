"""Independent numerical oracles used by the test suite.

The DFT oracles evaluate the transform definition directly with explicit
exponential matrices, so they share no code path with the library FFT.
"""

import numpy as np
import torch


def naive_dft2(x):
    """Orthonormal 2-D DFT of an (..., H, W) array via the defining sum."""
    x = np.asarray(x, dtype=np.complex128)
    h, w = x.shape[-2:]
    hh = np.arange(h)
    ww = np.arange(w)
    fh = np.exp(-2j * np.pi * np.outer(hh, hh) / h)
    fw = np.exp(-2j * np.pi * np.outer(ww, ww) / w)
    return np.einsum("uh,...hw,wv->...uv", fh, x, fw) / np.sqrt(h * w)


def naive_idft2(s):
    """Orthonormal 2-D inverse DFT of an (..., H, W) array."""
    s = np.asarray(s, dtype=np.complex128)
    h, w = s.shape[-2:]
    hh = np.arange(h)
    ww = np.arange(w)
    fh = np.exp(2j * np.pi * np.outer(hh, hh) / h)
    fw = np.exp(2j * np.pi * np.outer(ww, ww) / w)
    return np.einsum("hu,...uv,vw->...hw", fh, s, fw) / np.sqrt(h * w)


def rel_err(analytic, numeric, floor=1e-6):
    """Scale-free gradient discrepancy: max |a - n| / max(|a|_inf, |n|_inf).

    ``floor`` keeps the denominator sane when an entire gradient is zero up
    to finite-difference noise.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(np.abs(analytic).max(), np.abs(numeric).max(), floor)
    return float(np.abs(analytic - numeric).max() / scale)


def numeric_grad(fn, tensor, h=1e-5, coords=None):
    """Central finite differences of scalar fn w.r.t. one float64 tensor.

    ``coords`` restricts the check to a subset of flat indices (full tensor
    when None). Returns an array shaped like the coordinate list or tensor.
    """
    flat = tensor.detach().clone().reshape(-1)
    indices = range(flat.numel()) if coords is None else coords
    grads = []
    for i in indices:
        orig = flat[i].item()
        flat[i] = orig + h
        f_plus = float(fn(flat.reshape(tensor.shape)))
        flat[i] = orig - h
        f_minus = float(fn(flat.reshape(tensor.shape)))
        flat[i] = orig
        grads.append((f_plus - f_minus) / (2.0 * h))
    return np.array(grads)


def autograd_then_numeric(fn, tensor, h=1e-5, coords=None):
    """(analytic, numeric) gradients of scalar fn at a float64 tensor."""
    leaf = tensor.detach().clone().requires_grad_(True)
    fn(leaf).backward()
    analytic = leaf.grad.detach().reshape(-1).numpy()
    if coords is not None:
        analytic = analytic[list(coords)]
    with torch.no_grad():
        numeric = numeric_grad(fn, tensor, h=h, coords=coords)
    return analytic, numeric
