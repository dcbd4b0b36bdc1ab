"""Affine coupling blocks conditioned on a global code.

Each block splits its input with a binary mask. The masked half passes through
unchanged and, together with the broadcast global code, parameterizes a scale
and shift applied to the other half. This makes each block exactly invertible
with a log-determinant equal to the sum of the log-scales.
"""

import torch
from torch import nn


def checkerboard_mask(height, width, invert=False):
    """Float mask [1, 1, height, width] with ones where (row + col) is odd."""
    rows = torch.arange(height).view(-1, 1)
    cols = torch.arange(width).view(1, -1)
    mask = torch.fmod(rows + cols, 2).to(torch.float32)
    mask = mask.view(1, 1, height, width)
    if invert:
        mask = 1. - mask
    return mask


def channel_mask(channels, invert=False):
    """Float mask [1, channels, 1, 1] with ones on the first channels // 2."""
    half = channels // 2
    mask = torch.cat([torch.ones(half), torch.zeros(channels - half)])
    mask = mask.view(1, channels, 1, 1)
    if invert:
        mask = 1. - mask
    return mask


def alternating_masks(num_blocks, height, width, channels=3):
    """Masks cycling checkerboard, inverted checkerboard, channel, inverted
    channel."""
    cycle = [
        lambda: checkerboard_mask(height, width),
        lambda: checkerboard_mask(height, width, invert=True),
        lambda: channel_mask(channels),
        lambda: channel_mask(channels, invert=True),
    ]
    return [cycle[i % len(cycle)]() for i in range(num_blocks)]


class CouplingNet(nn.Module):
    """Small convolutional network emitting (log-scale, shift) per channel.

    The last convolution is zero-initialized, so a fresh network emits zero
    scale and shift and its coupling block is the identity.
    """

    def __init__(self, channels, cond_channels, hidden_channels):
        super(CouplingNet, self).__init__()
        self.net = nn.Sequential(
            nn.Conv2d(channels + cond_channels, hidden_channels, 3, padding=1),
            nn.ReLU(),
            nn.Conv2d(hidden_channels, hidden_channels, 1),
            nn.ReLU(),
            nn.Conv2d(hidden_channels, 2 * channels, 3, padding=1),
        )
        self.net[-1].weight.data.zero_()
        self.net[-1].bias.data.zero_()

    def forward(self, x, cond):
        return self.net(torch.cat([x, cond], dim=1))


class ConditionalAffineCoupling(nn.Module):
    """One invertible block y = (x + t) * exp(s) on the unmasked entries."""

    def __init__(self, mask, d_z, cond_channels=8, hidden_channels=32):
        """Constructor.

        Args:
            mask: Float tensor broadcastable to [N, C, H, W]. Entries equal to
                one condition the transformation and pass through unchanged.
            d_z: Int. Dimension of the global code.
            cond_channels: Int. Channels the global code is projected to before
                being broadcast over the image.
            hidden_channels: Int. Width of the coupling network.
        """
        super(ConditionalAffineCoupling, self).__init__()
        channels = 3
        self.register_buffer('mask', mask)
        self.cond_proj = nn.Linear(d_z, cond_channels)
        self.network = CouplingNet(channels, cond_channels, hidden_channels)
        self.scaling_factor = nn.Parameter(torch.zeros(channels))

    def _scale_shift(self, x, z):
        x_in = x * self.mask
        cond = self.cond_proj(z)[:, :, None, None].expand(
            -1, -1, x.shape[2], x.shape[3])
        s, t = self.network(x_in, cond).chunk(2, dim=1)
        # Bound the log-scale to (-s_fac, s_fac)
        s_fac = self.scaling_factor.exp().view(1, -1, 1, 1)
        s = torch.tanh(s / s_fac) * s_fac
        return s * (1. - self.mask), t * (1. - self.mask)

    def forward(self, x, z):
        """Returns (y, log-determinant [N])."""
        s, t = self._scale_shift(x, z)
        y = (x + t) * torch.exp(s)
        return y, s.flatten(1).sum(dim=1)

    def inverse(self, y, z):
        """Returns (x, log-determinant [N] of the inverse map)."""
        s, t = self._scale_shift(y, z)
        x = y * torch.exp(-s) - t
        return x, -s.flatten(1).sum(dim=1)
