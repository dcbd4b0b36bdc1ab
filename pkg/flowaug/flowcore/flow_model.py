"""Decoupled flow: a global-code encoder plus a flow conditioned on the code.

An image x is encoded into a global code z, the mean (or a sample) of the
encoder's Gaussian posterior, and a local code nu, the image pushed through the
preprocessing and the conditional flow at that z. Decoding runs the flow
backwards, so decode(encode(x)) = x up to float precision.

Example usage:
    ```python
    model = flow_model.FlowModel(image_shape=(32, 32, 3), d_z=64)
    z, nu = flow_model.encode(model, images)
    reconstructions = flow_model.decode(model, z, nu)
    ```

The module-level functions take and return numpy arrays in NHWC layout, either
one image [H, W, 3] or a batch [N, H, W, 3]. They never track gradients.
Training uses FlowModel.log_likelihood_terms directly.
"""

import math

import numpy as np
import torch
from torch import nn

from flowaug import errors
from . import coupling
from . import encoder as encoder_lib
from . import preprocessing

_LOG_2PI = math.log(2. * math.pi)


def bits_per_dim(log_likelihood, num_dims):
    """Bits/dim of 8-bit data from the log-density of its dequantized version.

    Args:
        log_likelihood: Log-density in nats of the dequantized data on the unit
            cube. Scalar, numpy array or tensor.
        num_dims: Int. Number of dimensions D = H * W * 3.

    Returns:
        (-log_likelihood + D log 256) / (D log 2), of the same type. A uniform
        density on the cube gives exactly 8.
    """
    return ((-log_likelihood + num_dims * math.log(256.)) /
            (num_dims * math.log(2.)))


def kl_standard_normal(mu, log_sigma):
    """KL(N(mu, sigma^2) || N(0, I)) per row, in nats."""
    return 0.5 * (mu ** 2 + torch.exp(2. * log_sigma) - 1. -
                  2. * log_sigma).sum(dim=1)


def standard_normal_log_prob(x):
    """Log-density of a standard normal, summed over all but the batch axis."""
    return (-0.5 * (x ** 2 + _LOG_2PI)).flatten(1).sum(dim=1)


def _check_finite(tensor, block_index, what):
    if not bool(torch.isfinite(tensor).all()):
        raise errors.NumericFailureError(
            'non-finite {}'.format(what), block_index=block_index)


class FlowModel(nn.Module):
    """Encoder of the global code and a conditional stack of coupling blocks."""

    def __init__(self,
                 image_shape=(32, 32, 3),
                 d_z=64,
                 num_blocks=8,
                 hidden_channels=32,
                 cond_channels=8,
                 encoder_channels=32,
                 epsilon=preprocessing.DEFAULT_EPSILON,
                 quants=preprocessing.DEFAULT_QUANTS):
        """Constructor.

        A freshly built model is identity-initialized: every coupling network
        emits zero scale and shift, so nu is the preprocessed image.

        Args:
            image_shape: Int tuple (H, W, 3).
            d_z: Int. Dimension of the global code.
            num_blocks: Int. Number of coupling blocks.
            hidden_channels: Int. Width of each coupling network.
            cond_channels: Int. Channels the global code is projected to inside
                each block.
            encoder_channels: Int. Width of the encoder.
            epsilon: Float. Logit-squeeze constant.
            quants: Int. Number of pixel levels for dequantization.
        """
        super(FlowModel, self).__init__()
        height, width, channels = image_shape
        if channels != 3:
            raise errors.InvalidArgumentError(
                'images must have 3 channels, got shape {}'.format(image_shape))
        if d_z < 1 or num_blocks < 1:
            raise errors.InvalidArgumentError(
                'd_z and num_blocks must be positive, got {} and {}'.format(
                    d_z, num_blocks))
        self.image_shape = (int(height), int(width), 3)
        self.d_z = int(d_z)
        self._architecture = {
            'image_shape': list(self.image_shape),
            'd_z': self.d_z,
            'num_blocks': int(num_blocks),
            'hidden_channels': int(hidden_channels),
            'cond_channels': int(cond_channels),
            'encoder_channels': int(encoder_channels),
        }
        self.preprocessing = preprocessing.LogitPreprocessing(epsilon, quants)
        self.encoder = encoder_lib.GlobalEncoder(d_z, encoder_channels)
        masks = coupling.alternating_masks(num_blocks, height, width)
        self.blocks = nn.ModuleList([
            coupling.ConditionalAffineCoupling(
                mask, d_z, cond_channels=cond_channels,
                hidden_channels=hidden_channels)
            for mask in masks
        ])

    @property
    def architecture(self):
        return dict(self._architecture)

    @property
    def num_dims(self):
        return int(np.prod(self.image_shape))

    @property
    def dtype(self):
        return self.encoder.head.weight.dtype

    def posterior(self, x):
        """(mu, log_sigma) of the global code for pixels x [N, 3, H, W]."""
        mu, log_sigma = self.encoder(x)
        _check_finite(mu, None, 'encoder mean')
        _check_finite(log_sigma, None, 'encoder log-sigma')
        return mu, log_sigma

    def flow_forward(self, y, z):
        """Preprocessed image [N, 3, H, W] -> (nu, log-determinant [N])."""
        ldj = torch.zeros(y.shape[0], dtype=y.dtype, device=y.device)
        for i, block in enumerate(self.blocks):
            y, block_ldj = block(y, z)
            _check_finite(y, i, 'activations')
            ldj = ldj + block_ldj
        return y, ldj

    def flow_inverse(self, nu, z):
        """Local code [N, 3, H, W] -> (preprocessed image, log-determinant)."""
        ldj = torch.zeros(nu.shape[0], dtype=nu.dtype, device=nu.device)
        for i in reversed(range(len(self.blocks))):
            nu, block_ldj = self.blocks[i].inverse(nu, z)
            _check_finite(nu, i, 'activations')
            ldj = ldj + block_ldj
        return nu, ldj

    def log_likelihood_terms(self, x, noise=None, eta=None):
        """Terms of the variational bound on log p(x).

        Args:
            x: Tensor [N, 3, H, W] of 8-bit pixels scaled to [0, 1].
            noise: Optional dequantization noise like x, values in [0, 1). The
                bin midpoint 0.5 is used if None.
            eta: Optional standard-normal tensor [N, d_z] for sampling the
                global code. The posterior mean is used if None.

        Returns:
            log_px_given_z: Tensor [N]. Log-density in nats of the dequantized
                pixels given the global code.
            kl: Tensor [N]. KL of the global posterior against N(0, I).
        """
        if noise is None:
            noise = torch.full_like(x, 0.5)
        mu, log_sigma = self.posterior(x)
        z = mu if eta is None else mu + torch.exp(log_sigma) * eta
        x_deq = self.preprocessing.dequantize(x, noise)
        y, pre_ldj = self.preprocessing.forward(x_deq)
        nu, flow_ldj = self.flow_forward(y, z)
        log_px_given_z = standard_normal_log_prob(nu) + flow_ldj + pre_ldj
        return log_px_given_z, kl_standard_normal(mu, log_sigma)


def _to_nchw(model, x, trailing_shape, name):
    """Numpy/tensor input -> (tensor batch, was_single)."""
    x = torch.as_tensor(np.asarray(x)).to(model.dtype)
    single = x.dim() == len(trailing_shape)
    if single:
        x = x.unsqueeze(0)
    if tuple(x.shape[1:]) != tuple(trailing_shape):
        raise errors.InvalidArgumentError(
            '{} must have shape {} or [N] + {}, got {}'.format(
                name, list(trailing_shape), list(trailing_shape),
                list(x.shape)))
    if x.dim() == 4:
        x = x.permute(0, 3, 1, 2)
    return x, single


def _to_numpy(tensor, single):
    if tensor.dim() == 4:
        tensor = tensor.permute(0, 2, 3, 1)
    array = tensor.detach().cpu().numpy().astype(np.float32)
    return array[0] if single else array


def encode(model, x, mode='mean', rng=None):
    """Encode images into (z, nu).

    Args:
        model: Instance of FlowModel.
        x: Array [H, W, 3] or [N, H, W, 3] with values in [0, 1].
        mode: 'mean' uses z = mu(x). 'sample' uses z = mu(x) + sigma(x) * eta.
        rng: numpy Generator providing eta in 'sample' mode.

    Returns:
        z: Float32 array [d_z] or [N, d_z].
        nu: Float32 array shaped like x.
    """
    if mode not in ('mean', 'sample'):
        raise errors.InvalidArgumentError(
            'mode must be mean or sample, got {!r}'.format(mode))
    x, single = _to_nchw(model, x, model.image_shape, 'x')
    if bool((x < 0.).any()) or bool((x > 1.).any()):
        raise errors.InvalidArgumentError('pixel values must be in [0, 1]')
    with torch.no_grad():
        mu, log_sigma = model.posterior(x)
        z = mu
        if mode == 'sample':
            if rng is None:
                raise errors.InvalidArgumentError('sample mode needs an rng')
            eta = torch.as_tensor(
                rng.standard_normal(tuple(mu.shape))).to(mu.dtype)
            z = mu + torch.exp(log_sigma) * eta
        y, _ = model.preprocessing.forward(x)
        nu, _ = model.flow_forward(y, z)
    return _to_numpy(z, single), _to_numpy(nu, single)


def decode(model, z, nu):
    """Invert the flow at global code z and map back to pixels in [0, 1].

    Args:
        model: Instance of FlowModel.
        z: Array [d_z] or [N, d_z].
        nu: Array [H, W, 3] or [N, H, W, 3], batched like z.

    Returns:
        Float32 array shaped like nu with values in [0, 1].
    """
    nu, single = _to_nchw(model, nu, model.image_shape, 'nu')
    z, z_single = _to_nchw(model, z, (model.d_z,), 'z')
    if single != z_single or z.shape[0] != nu.shape[0]:
        raise errors.InvalidArgumentError(
            'z and nu batch shapes differ: {} and {}'.format(
                list(z.shape), list(nu.shape)))
    with torch.no_grad():
        y, _ = model.flow_inverse(nu, z)
        x = model.preprocessing.inverse(y)
    return _to_numpy(x, single)


def nll_bpd(model, x, rng=None):
    """Negative log-likelihood bound in bits/dim, per example.

    Args:
        model: Instance of FlowModel.
        x: Array [H, W, 3] or [N, H, W, 3] of 8-bit pixels scaled to [0, 1].
        rng: Optional numpy Generator for the dequantization noise and the
            posterior sample of z. If None, evaluation is deterministic (bin
            midpoints and the posterior mean) and each example's value depends
            on that example only.

    Returns:
        Float (single image) or float64 array [N].
    """
    x, single = _to_nchw(model, x, model.image_shape, 'x')
    noise = eta = None
    if rng is not None:
        noise = torch.as_tensor(rng.uniform(size=tuple(x.shape))).to(x.dtype)
        eta = torch.as_tensor(
            rng.standard_normal((x.shape[0], model.d_z))).to(x.dtype)
    with torch.no_grad():
        log_px_given_z, kl = model.log_likelihood_terms(x, noise, eta)
        bpd = bits_per_dim(log_px_given_z - kl, model.num_dims)
    _check_finite(bpd, None, 'bits/dim')
    bpd = bpd.cpu().numpy().astype(np.float64)
    return float(bpd[0]) if single else bpd
