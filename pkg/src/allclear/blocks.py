import torch
import torch.nn as nn
import torch.nn.functional as F

from . import spectral
from .errors import ShapeError

LEAKY_SLOPE = 0.2


def init_weights(module):
    """Kaiming fan-in normal init for conv/linear weights, zero biases."""
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
        nn.init.kaiming_normal_(module.weight, mode="fan_in", nonlinearity="relu")
        if module.bias is not None:
            nn.init.zeros_(module.bias)


class DegradationRemover(nn.Module):
    """Channel gate driven by the channel-dependent part of the Fourier amplitude.

    The per-channel amplitude of the input spectrum, minus the amplitude of
    the channel-mean feature, is pooled over space and passed through a
    squeeze/excite style MLP with a sigmoid. The resulting vector in (0,1)^C
    rescales the input channels.

    ``amplitude_guidance=False`` removes the gate entirely (identity, and
    the MLP parameters are not created). ``subtract_mean_amplitude=False``
    feeds the raw amplitude to the gate instead of the channel-dependent
    remainder.
    """

    def __init__(self, channels, reduction=4, amplitude_guidance=True,
                 subtract_mean_amplitude=True):
        super().__init__()
        self.channels = channels
        self.amplitude_guidance = amplitude_guidance
        self.subtract_mean_amplitude = subtract_mean_amplitude
        if amplitude_guidance:
            hidden = max(1, channels // reduction)
            self.fc1 = nn.Linear(channels, hidden)
            self.fc2 = nn.Linear(hidden, channels)
        self.apply(init_weights)

    def forward(self, x):
        if x.dim() != 4 or x.shape[1] != self.channels:
            raise ShapeError(
                f"expected (B, {self.channels}, H, W), got {tuple(x.shape)}"
            )
        if not self.amplitude_guidance:
            return x
        amp = torch.abs(spectral.fft2(x))
        if self.subtract_mean_amplitude:
            # Shifted mean: returns x[:, :1] bitwise when all channels are
            # identical, so the channel-dependent amplitude vanishes exactly.
            first = x[:, :1]
            channel_mean = first + (x - first).mean(dim=1, keepdim=True)
            amp = amp - torch.abs(spectral.fft2(channel_mean))
        pooled = amp.mean(dim=(2, 3))
        gate = torch.sigmoid(self.fc2(F.relu(self.fc1(pooled))))
        return x * gate[:, :, None, None]


class ConvLeakyConv(nn.Module):
    """Two 3x3 convolutions with a LeakyReLU in between."""

    def __init__(self, in_channels, out_channels):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels, out_channels, 3, padding=1)
        self.conv2 = nn.Conv2d(out_channels, out_channels, 3, padding=1)
        self.apply(init_weights)

    def forward(self, x):
        return self.conv2(F.leaky_relu(self.conv1(x), LEAKY_SLOPE))


class ResidualDenseBlock(nn.Module):
    """Densely connected 3x3 convolutions with 1x1 fusion and a residual add."""

    def __init__(self, channels, depth=4, growth=None):
        super().__init__()
        if growth is None:
            growth = max(1, channels // 2)
        self.convs = nn.ModuleList(
            nn.Conv2d(channels + i * growth, growth, 3, padding=1)
            for i in range(depth)
        )
        self.fuse = nn.Conv2d(channels + depth * growth, channels, 1)
        self.apply(init_weights)

    def forward(self, x):
        feats = x
        for conv in self.convs:
            feats = torch.cat([feats, F.leaky_relu(conv(feats), LEAKY_SLOPE)], dim=1)
        return x + self.fuse(feats)


class ContentReconstructor(nn.Module):
    """Global Fourier branch plus local dense branch, fused by a 1x1 conv.

    Global branch: the spectrum is averaged over channels to suppress
    channel-dependent degradation, its real and imaginary parts are mixed
    by four ConvLeakyConv blocks (each lifting 1 -> C channels) with 3x3
    fusion convs, and the result returns to the spatial domain via the
    inverse transform. Local branch: a residual dense block on the input.
    """

    def __init__(self, channels, rdb_depth=4, rdb_growth=None):
        super().__init__()
        self.channels = channels
        self.clc_rr = ConvLeakyConv(1, channels)
        self.clc_ri = ConvLeakyConv(1, channels)
        self.clc_ir = ConvLeakyConv(1, channels)
        self.clc_ii = ConvLeakyConv(1, channels)
        self.mix_real = nn.Conv2d(2 * channels, channels, 3, padding=1)
        self.mix_imag = nn.Conv2d(2 * channels, channels, 3, padding=1)
        self.local = ResidualDenseBlock(channels, rdb_depth, rdb_growth)
        self.fuse = nn.Conv2d(2 * channels, channels, 1)
        self.apply(init_weights)

    def forward(self, x):
        if x.dim() != 4 or x.shape[1] != self.channels:
            raise ShapeError(
                f"expected (B, {self.channels}, H, W), got {tuple(x.shape)}"
            )
        spectrum = spectral.fft2(x).mean(dim=1, keepdim=True)
        real, imag = spectrum.real, spectrum.imag
        mixed_real = self.mix_real(torch.cat([self.clc_rr(real), self.clc_ri(imag)], dim=1))
        mixed_imag = self.mix_imag(torch.cat([self.clc_ir(real), self.clc_ii(imag)], dim=1))
        global_out = spectral.ifft2(torch.complex(mixed_real, mixed_imag))
        local_out = self.local(x)
        return self.fuse(torch.cat([global_out, local_out], dim=1))
