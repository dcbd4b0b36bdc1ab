"""Encoder of the global code: image -> (mu, sigma) of a diagonal Gaussian."""

import torch
from torch import nn

# Soft bound on log-sigma keeps sigma in (e^-6, e^6)
_LOG_SIGMA_BOUND = 6.


class GlobalEncoder(nn.Module):
    """Strided convolutional network followed by a linear head."""

    def __init__(self, d_z=64, hidden_channels=32):
        super(GlobalEncoder, self).__init__()
        self.d_z = d_z
        h = hidden_channels
        self.features = nn.Sequential(
            nn.Conv2d(3, h, 3, stride=2, padding=1),
            nn.ReLU(),
            nn.Conv2d(h, 2 * h, 3, stride=2, padding=1),
            nn.ReLU(),
            nn.Conv2d(2 * h, 2 * h, 3, padding=1),
            nn.ReLU(),
            nn.AdaptiveAvgPool2d(1),
            nn.Flatten(),
        )
        self.head = nn.Linear(2 * h, 2 * d_z)

    def forward(self, x):
        """Posterior parameters of the global code.

        Args:
            x: Tensor [N, 3, H, W] of pixels in [0, 1].

        Returns:
            mu, log_sigma: Tensors [N, d_z].
        """
        mu, log_sigma = self.head(self.features(2. * x - 1.)).chunk(2, dim=1)
        log_sigma = _LOG_SIGMA_BOUND * torch.tanh(log_sigma / _LOG_SIGMA_BOUND)
        return mu, log_sigma
