"""Perturbation and interpolation parameters of the FlowAug transforms.

A PerturbSpec describes an additive perturbation of one of the two codes,
drawn i.i.d. per coordinate either from a Gaussian truncated to [-bound, bound]
or from a uniform distribution. A MixSpec describes a Beta-weighted
interpolation of two images' codes, with weights below the flip threshold
mirrored so the first image always dominates.
"""

import dataclasses
import math

import numpy as np
from scipy import stats

from flowaug import errors

TRUNC_GAUSSIAN = 'trunc_gaussian'
UNIFORM = 'uniform'
DISTRIBUTIONS = (TRUNC_GAUSSIAN, UNIFORM)

GLOBAL_Z = 'global_z'
LOCAL_NU = 'local_nu'
TARGETS = (GLOBAL_Z, LOCAL_NU)

MIN_ACCEPTANCE = 1e-6


def _num_and_shape(n):
    shape = (int(n),) if np.isscalar(n) else tuple(int(d) for d in n)
    return int(np.prod(shape)), shape


def trunc_gaussian_acceptance(mu, sigma, b):
    """Probability that N(mu, sigma^2) falls in [-b, b]."""
    return float(stats.norm.cdf((b - mu) / sigma) -
                 stats.norm.cdf((-b - mu) / sigma))


def sample_trunc_gaussian(mu, sigma, b, n, rng):
    """Draw from N(mu, sigma^2) conditioned on [-b, b] by rejection.

    Args:
        mu: Float. Mean of the untruncated Gaussian.
        sigma: Positive float. Its standard deviation.
        b: Positive float. Half-width of the truncation interval.
        n: Int or shape tuple.
        rng: numpy Generator.

    Returns:
        Float64 array of shape n, every entry in [-b, b].

    Raises:
        errors.InvalidArgumentError: sigma or b not positive.
        errors.SamplerError: The interval holds less than MIN_ACCEPTANCE of
            the Gaussian's mass.
    """
    if not sigma > 0. or not b > 0.:
        raise errors.InvalidArgumentError(
            'sigma and b must be positive, got sigma={}, b={}'.format(
                sigma, b))
    acceptance = trunc_gaussian_acceptance(mu, sigma, b)
    if acceptance < MIN_ACCEPTANCE:
        raise errors.SamplerError(
            'truncation to [-{b}, {b}] keeps {p:.3g} of N({mu}, {s}^2), below '
            '{m}'.format(b=b, p=acceptance, mu=mu, s=sigma, m=MIN_ACCEPTANCE))
    num, shape = _num_and_shape(n)
    samples = np.empty(num, dtype=np.float64)
    filled = 0
    while filled < num:
        remaining = num - filled
        draw = int(math.ceil(1.1 * remaining / acceptance)) + 16
        candidates = rng.normal(mu, sigma, size=draw)
        accepted = candidates[np.abs(candidates) <= b][:remaining]
        samples[filled:filled + len(accepted)] = accepted
        filled += len(accepted)
    return samples.reshape(shape)


def flip_mix_weight(m, tr):
    """Mirror interpolation weights below the threshold: m -> 1 - m if m < tr.

    Works elementwise on arrays.
    """
    m = np.asarray(m, dtype=np.float64)
    flipped = np.where(m < tr, 1. - m, m)
    return float(flipped) if flipped.ndim == 0 else flipped


@dataclasses.dataclass
class PerturbSpec:
    """Additive perturbation of a code (transform family T1).

    Fields:
        distribution: 'trunc_gaussian' or 'uniform'.
        mu, sigma, bound: Truncated Gaussian N(mu, sigma^2) on [-bound, bound].
        low, high: Uniform U(low, high).
        target: 'global_z' perturbs z, 'local_nu' perturbs nu.
        clamp_to_bound: If True, the perturbed code is additionally clamped to
            [-bound, bound].
    """
    distribution: str = TRUNC_GAUSSIAN
    mu: float = 0.
    sigma: float = 0.1
    bound: float = 4.
    low: float = -0.2
    high: float = 0.2
    target: str = GLOBAL_Z
    clamp_to_bound: bool = False

    def validate(self):
        if self.distribution not in DISTRIBUTIONS:
            raise errors.InvalidArgumentError(
                'distribution must be one of {}, got {!r}'.format(
                    DISTRIBUTIONS, self.distribution))
        if self.target not in TARGETS:
            raise errors.InvalidArgumentError(
                'target must be one of {}, got {!r}'.format(
                    TARGETS, self.target))
        if self.distribution == TRUNC_GAUSSIAN:
            if not self.sigma > 0. or not self.bound > 0.:
                raise errors.InvalidArgumentError(
                    'sigma and bound must be positive, got {} and {}'.format(
                        self.sigma, self.bound))
        elif not self.low < self.high:
            raise errors.InvalidArgumentError(
                'need low < high, got {} and {}'.format(self.low, self.high))
        if self.clamp_to_bound and not self.bound > 0.:
            raise errors.InvalidArgumentError(
                'clamping needs a positive bound')

    def sample(self, shape, rng):
        """Perturbation array of the given shape."""
        if self.distribution == TRUNC_GAUSSIAN:
            return sample_trunc_gaussian(
                self.mu, self.sigma, self.bound, shape, rng)
        return rng.uniform(self.low, self.high, size=shape)

    def apply(self, code, rng):
        """code + perturbation, clamped if requested."""
        out = code + self.sample(np.shape(code), rng).astype(code.dtype)
        if self.clamp_to_bound:
            out = np.clip(out, -self.bound, self.bound)
        return out


@dataclasses.dataclass
class MixSpec:
    """Beta-weighted interpolation of two codes (transform family T2).

    Fields:
        alpha: Beta(alpha, alpha) concentration.
        tr: Flip threshold in [0, 1].
        target: 'global_z' interpolates z at fixed nu of the first image,
            'local_nu' interpolates nu at fixed z of the first image.
    """
    alpha: float = 1.
    tr: float = 0.5
    target: str = GLOBAL_Z

    def validate(self):
        if not self.alpha > 0.:
            raise errors.InvalidArgumentError(
                'alpha must be positive, got {}'.format(self.alpha))
        if not 0. <= self.tr <= 1.:
            raise errors.InvalidArgumentError(
                'tr must be in [0, 1], got {}'.format(self.tr))
        if self.target not in TARGETS:
            raise errors.InvalidArgumentError(
                'target must be one of {}, got {!r}'.format(
                    TARGETS, self.target))

    def sample_weight(self, rng, size=None):
        """Flipped interpolation weight(s) on the first image."""
        return flip_mix_weight(rng.beta(self.alpha, self.alpha, size=size),
                               self.tr)
