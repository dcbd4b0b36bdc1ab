"""Dequantization and logit squeeze between pixel space and flow space.

Pixels x in [0, 1] are mapped to y = logit(eps + (1 - 2 eps) x). Training and
likelihood evaluation first dequantize 8-bit pixels, x <- (255 x + u) / 256
with u uniform on [0, 1), so that the density of the continuous data is well
defined and bits/dim of the discrete data follow from it.
"""

import math

import torch
import torch.nn.functional as F

DEFAULT_EPSILON = 0.05
DEFAULT_QUANTS = 256


class LogitPreprocessing(object):
    """Invertible map from [0, 1] pixels to the real line.

    Holds no parameters; the constants are recorded in checkpoints.
    """

    def __init__(self, epsilon=DEFAULT_EPSILON, quants=DEFAULT_QUANTS):
        if not 0. < epsilon < 0.5:
            raise ValueError('epsilon must be in (0, 0.5), got {}'.format(
                epsilon))
        self.epsilon = float(epsilon)
        self.quants = int(quants)

    def forward(self, x):
        """Map pixels to flow space.

        Args:
            x: Tensor of pixels in [0, 1], batch first.

        Returns:
            y: Tensor of the same shape.
            ldj: Tensor [batch]. Log-determinant of the Jacobian dy/dx.
        """
        scale = 1. - 2. * self.epsilon
        squeezed = self.epsilon + scale * x
        y = torch.log(squeezed) - torch.log1p(-squeezed)
        # d logit(s) / ds = 1 / (s (1 - s)), expressed with softplus for y
        log_jac = math.log(scale) + F.softplus(-y) + F.softplus(y)
        ldj = log_jac.flatten(1).sum(dim=1)
        return y, ldj

    def inverse(self, y):
        """Map flow-space values back to pixels, clamped to [0, 1]."""
        x = (torch.sigmoid(y) - self.epsilon) / (1. - 2. * self.epsilon)
        return x.clamp(0., 1.)

    def dequantize(self, x, noise):
        """Spread 8-bit pixels uniformly over their bins.

        Args:
            x: Tensor of pixels k / (quants - 1).
            noise: Tensor of the same shape with values in [0, 1).
        """
        levels = self.quants - 1
        return (torch.round(x * levels) + noise) / self.quants

    def to_dict(self):
        return {'epsilon': self.epsilon, 'quants': self.quants}
