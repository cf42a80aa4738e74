import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from allclear import spectral
from allclear.errors import ShapeError
from allclear.synthdata import HazeParams, gen_haze, random_scene
from allclear.metrics import psnr

from reference import naive_dft2, naive_idft2


def test_impulse_has_flat_spectrum():
    x = torch.zeros(1, 4, 4)
    x[0, 0, 0] = 1.0
    s = spectral.fft2(x)
    assert torch.allclose(s.real, torch.full((1, 4, 4), 0.25), atol=1e-7)
    assert torch.allclose(s.imag, torch.zeros(1, 4, 4), atol=1e-7)


def test_constant_image_is_dc_only():
    c = 0.37
    s = spectral.fft2(torch.full((8, 8), c))
    assert s[0, 0].real.item() == pytest.approx(8 * c, abs=1e-6)
    others = s.clone()
    others[0, 0] = 0
    assert others.abs().max().item() < 1e-6


def test_round_trip_random():
    torch.manual_seed(0)
    x = torch.rand(3, 16, 16)
    err = (spectral.ifft2(spectral.fft2(x)) - x).abs().max().item()
    assert err < 1e-5


def test_round_trip_float64():
    torch.manual_seed(1)
    x = torch.rand(3, 16, 16, dtype=torch.float64)
    err = (spectral.ifft2(spectral.fft2(x)) - x).abs().max().item()
    assert err < 1e-10


def test_fft2_rejects_non_finite():
    x = torch.ones(4, 4)
    x[1, 2] = float("nan")
    with pytest.raises(ValueError, match="non-finite"):
        spectral.fft2(x)


def test_ifft2_dc_only_spectrum_gives_constant():
    c = 0.8
    s = torch.zeros(6, 6, dtype=torch.complex64)
    s[0, 0] = 6 * c  # sqrt(HW) * c
    out = spectral.ifft2(s)
    assert torch.allclose(out, torch.full((6, 6), c), atol=1e-6)


def test_ifft2_single_offcenter_bin_matches_naive_inverse():
    s = np.zeros((5, 7), dtype=np.complex128)
    s[2, 3] = 1.5 - 0.5j
    expected = naive_idft2(s).real
    out = spectral.ifft2(torch.from_numpy(s))
    assert np.abs(out.numpy() - expected).max() < 1e-12


def test_ifft2_records_imag_residue_for_asymmetric_spectrum():
    spectral.imag_residue.reset()
    s = torch.zeros(4, 4, dtype=torch.complex64)
    s[1, 1] = 1.0  # no conjugate partner
    spectral.ifft2(s)
    assert spectral.imag_residue.last > 0.0
    assert spectral.imag_residue.max >= spectral.imag_residue.last


def test_fft2_matches_naive_dft():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((2, 6, 5))
    ours = spectral.fft2(torch.from_numpy(x)).numpy()
    assert np.abs(ours - naive_dft2(x)).max() < 1e-10


def test_decompose_three_four_five():
    s = torch.complex(torch.tensor([3.0]), torch.tensor([4.0]))
    amp, phase = spectral.decompose(s)
    assert amp.item() == pytest.approx(5.0, abs=1e-6)
    assert phase.item() == pytest.approx(np.arctan2(4.0, 3.0), abs=1e-7)


def test_decompose_zero_bin_convention():
    amp, phase = spectral.decompose(torch.zeros(3, dtype=torch.complex64))
    assert amp.abs().max().item() == 0.0
    assert phase.abs().max().item() == 0.0


def test_recombine_trivials():
    s = spectral.recombine(torch.tensor([1.0]), torch.tensor([0.0]))
    assert s.real.item() == pytest.approx(1.0) and s.imag.item() == pytest.approx(0.0)
    s = spectral.recombine(torch.tensor([2.0]), torch.tensor([np.pi / 2]))
    assert abs(s.real.item()) < 1e-7
    assert s.imag.item() == pytest.approx(2.0, abs=1e-7)


def test_recombine_rejects_negative_amplitude():
    with pytest.raises(ValueError, match="non-negative"):
        spectral.recombine(torch.tensor([-0.1]), torch.tensor([0.0]))


def test_decompose_recombine_round_trip():
    torch.manual_seed(2)
    amp = torch.rand(4, 8, 8) + 0.01
    phase = (torch.rand(4, 8, 8) - 0.5) * 1.9 * np.pi
    amp2, phase2 = spectral.decompose(spectral.recombine(amp, phase))
    assert (amp2 - amp).abs().max().item() < 1e-6
    assert (phase2 - phase).abs().max().item() < 1e-6


def test_recombine_decompose_round_trip():
    torch.manual_seed(3)
    s = torch.complex(torch.randn(2, 8, 8), torch.randn(2, 8, 8))
    s2 = spectral.recombine(*spectral.decompose(s))
    assert (s2 - s).abs().max().item() < 1e-6


@settings(max_examples=25, deadline=None)
@given(
    h=st.integers(min_value=1, max_value=12),
    w=st.integers(min_value=1, max_value=12),
    seed=st.integers(min_value=0, max_value=1000),
)
def test_parseval_and_round_trip_property(h, w, seed):
    torch.manual_seed(seed)
    x = torch.randn(2, h, w)
    s = spectral.fft2(x)
    energy_x = (x ** 2).sum().item()
    energy_s = (s.real ** 2 + s.imag ** 2).sum().item()
    assert energy_s == pytest.approx(energy_x, rel=1e-5)
    assert (spectral.ifft2(s) - x).abs().max().item() < 1e-5


def test_conjugate_symmetry_for_real_input():
    torch.manual_seed(4)
    x = torch.randn(3, 10, 14)
    s = spectral.fft2(x).numpy()
    h, w = 10, 14
    mirrored = s[:, (-np.arange(h)) % h][:, :, (-np.arange(w)) % w]
    assert np.abs(s - np.conj(mirrored)).max() < 1e-5


def test_linearity():
    torch.manual_seed(5)
    x = torch.randn(2, 9, 9)
    y = torch.randn(2, 9, 9)
    a, b = 1.7, -0.4
    lhs = spectral.fft2(a * x + b * y)
    rhs = a * spectral.fft2(x) + b * spectral.fft2(y)
    assert (lhs - rhs).abs().max().item() < 1e-5


def test_amplitude_swap_self_identity():
    torch.manual_seed(6)
    x = torch.rand(3, 12, 12)
    out1, out2 = spectral.amplitude_swap(x, x)
    assert (out1 - x).abs().max().item() < 1e-5
    assert (out2 - x).abs().max().item() < 1e-5


def test_amplitude_swap_transfers_amplitude():
    torch.manual_seed(7)
    a = torch.rand(3, 16, 16)
    b = torch.rand(3, 16, 16)
    out1, _ = spectral.amplitude_swap(a, b)
    amp_out = spectral.fft2(out1).abs()
    amp_b = spectral.fft2(b).abs()
    assert (amp_out - amp_b).abs().max().item() < 1e-5


def test_amplitude_swap_shape_mismatch():
    with pytest.raises(ShapeError):
        spectral.amplitude_swap(torch.rand(3, 8, 8), torch.rand(3, 8, 10))


def test_amplitude_swap_restores_hazy_image():
    # moving the clean amplitude onto the degraded phase should beat the input
    clean = random_scene(64, seed=11)
    sample = gen_haze(clean, HazeParams(), seed=12)
    d = torch.from_numpy(sample.degraded).permute(2, 0, 1)
    c = torch.from_numpy(sample.clean).permute(2, 0, 1)
    swapped, _ = spectral.amplitude_swap(d, c)
    restored = swapped.permute(1, 2, 0).numpy().clip(0.0, 1.0)
    assert psnr(restored, sample.clean) > psnr(sample.degraded, sample.clean)
