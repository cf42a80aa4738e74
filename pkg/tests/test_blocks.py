import numpy as np
import pytest
import torch
import torch.nn as nn

from allclear.blocks import (
    ContentReconstructor,
    ConvLeakyConv,
    DegradationRemover,
    ResidualDenseBlock,
)
from allclear.errors import ShapeError

from reference import naive_idft2


def zero_params(module):
    with torch.no_grad():
        for p in module.parameters():
            p.zero_()


class TestDegradationRemover:
    def test_identical_channels_gate_is_half(self):
        # A_deg vanishes exactly, so with zero biases the gate is sigmoid(0).
        torch.manual_seed(0)
        for channels in (3, 4, 16):
            drm = DegradationRemover(channels)
            base = torch.rand(2, 1, 9, 7)
            x = base.repeat(1, channels, 1, 1)
            out = drm(x)
            assert torch.equal(out, 0.5 * x)

    def test_identical_channels_zero_degradation_amplitude(self):
        # the quantity the gate sees, recomputed outside the block
        torch.manual_seed(1)
        x = torch.rand(1, 1, 8, 8).repeat(1, 5, 1, 1)
        amp = torch.fft.fft2(x, norm="ortho").abs()
        first = x[:, :1]
        mean = first + (x - first).mean(dim=1, keepdim=True)
        amp_ci = torch.fft.fft2(mean, norm="ortho").abs()
        assert torch.equal(amp - amp_ci, torch.zeros_like(amp))

    def test_output_is_per_channel_scaling(self):
        torch.manual_seed(2)
        drm = DegradationRemover(6)
        x = torch.rand(2, 6, 11, 13) + 0.1
        out = drm(x)
        ratio = out / x
        for b in range(2):
            for c in range(6):
                vals = ratio[b, c]
                assert (vals - vals.mean()).abs().max().item() < 1e-6

    def test_gate_shrinks_magnitudes(self):
        torch.manual_seed(3)
        drm = DegradationRemover(8)
        x = torch.randn(2, 8, 16, 16)
        out = drm(x)
        assert (out.abs() <= x.abs() + 1e-7).all()

    def test_channel_mismatch_rejected(self):
        drm = DegradationRemover(4)
        with pytest.raises(ShapeError):
            drm(torch.rand(1, 5, 8, 8))

    def test_amplitude_guidance_off_is_identity_without_params(self):
        drm = DegradationRemover(4, amplitude_guidance=False)
        assert sum(p.numel() for p in drm.parameters()) == 0
        x = torch.rand(1, 4, 8, 8)
        assert torch.equal(drm(x), x)

    def test_mean_subtraction_flag_changes_gate(self):
        torch.manual_seed(4)
        drm = DegradationRemover(8)
        with torch.no_grad():
            for p in drm.parameters():
                p.normal_()
        drm_raw = DegradationRemover(8, subtract_mean_amplitude=False)
        drm_raw.load_state_dict(drm.state_dict())
        x = torch.rand(1, 8, 12, 12)
        assert not torch.allclose(drm(x), drm_raw(x))

    def test_positive_scaling_keeps_gating_structure(self):
        torch.manual_seed(5)
        drm = DegradationRemover(4)
        x = torch.rand(1, 4, 8, 8) + 0.2
        out = drm(3.7 * x)
        ratio = out / (3.7 * x)
        for c in range(4):
            vals = ratio[0, c]
            assert (vals - vals.mean()).abs().max().item() < 1e-6
            assert 0.0 < vals.mean().item() < 1.0


class TestResidualDenseBlock:
    def test_zero_params_is_identity(self):
        rdb = ResidualDenseBlock(8)
        zero_params(rdb)
        x = torch.rand(2, 8, 10, 10)
        assert torch.equal(rdb(x), x)

    def test_shape_preserved_odd_sizes(self):
        rdb = ResidualDenseBlock(8)
        out = rdb(torch.rand(1, 8, 17, 23))
        assert out.shape == (1, 8, 17, 23)

    def test_default_init_output_bounded(self):
        torch.manual_seed(42)
        rdb = ResidualDenseBlock(16)
        x = torch.randn(2, 16, 16, 16)
        out = rdb(x)
        assert torch.isfinite(out).all()
        assert out.abs().max().item() < 1e3

    def test_growth_default_is_half_width(self):
        rdb = ResidualDenseBlock(16, depth=4)
        assert rdb.convs[0].in_channels == 16
        assert rdb.convs[0].out_channels == 8
        assert rdb.convs[3].in_channels == 16 + 3 * 8
        assert rdb.fuse.in_channels == 16 + 4 * 8


class TestContentReconstructor:
    def test_zero_params_gives_zero(self):
        crm = ContentReconstructor(8)
        zero_params(crm)
        x = torch.rand(2, 8, 12, 12)
        assert torch.equal(crm(x), torch.zeros_like(x))

    def test_shape_contract(self):
        crm = ContentReconstructor(16)
        out = crm(torch.rand(2, 16, 32, 32))
        assert out.shape == (2, 16, 32, 32)

    def test_shape_preserved_odd_sizes(self):
        crm = ContentReconstructor(4)
        out = crm(torch.rand(1, 4, 17, 23))
        assert out.shape == (1, 4, 17, 23)

    def test_channel_mismatch_rejected(self):
        crm = ContentReconstructor(4)
        with pytest.raises(ShapeError):
            crm(torch.rand(1, 6, 8, 8))

    def test_constant_input_zero_weights_bias_gives_impulse(self):
        # With zero weights, the mixed real/imag maps are constant spectra
        # equal to the fusion-conv biases; their inverse transform is an
        # impulse of height bias * sqrt(H*W) at pixel (0, 0).
        channels, h, w = 3, 8, 8
        crm = ContentReconstructor(channels)
        zero_params(crm)
        with torch.no_grad():
            crm.mix_real.bias.copy_(torch.tensor([0.5, -0.25, 1.0]))
            crm.mix_imag.bias.copy_(torch.tensor([0.75, 0.1, -0.3]))
            # route only the global branch through the 1x1 fusion
            for c in range(channels):
                crm.fuse.weight[c, c, 0, 0] = 1.0
        x = torch.full((1, channels, h, w), 0.6)
        out = crm(x)
        for c, bias in enumerate([0.5, -0.25, 1.0]):
            spectrum = np.full((h, w), bias, dtype=np.complex128)
            spectrum += 1j * crm.mix_imag.bias[c].item()
            expected = naive_idft2(spectrum).real
            assert np.abs(out[0, c].detach().numpy() - expected).max() < 1e-5
            assert out[0, c, 0, 0].item() == pytest.approx(bias * np.sqrt(h * w), abs=1e-5)
            mask = torch.ones(h, w, dtype=torch.bool)
            mask[0, 0] = False
            assert out[0, c][mask].abs().max().item() < 1e-5


def test_conv_leaky_conv_lifts_channels():
    clc = ConvLeakyConv(1, 8)
    out = clc(torch.rand(2, 1, 9, 11))
    assert out.shape == (2, 8, 9, 11)
