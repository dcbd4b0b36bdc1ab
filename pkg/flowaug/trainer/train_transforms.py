"""Batch transforms used by the training objectives.

A transform is a callable t(x, y, rng) -> (x', y') on a batch of images
[N, H, W, 3] and soft targets [N, C]. Pixel baselines may change the targets;
FlowAug transforms never do.
"""

import abc

import numpy as np

from flowaug.augment import transforms as flow_transforms
from . import baselines


class AbstractTransform(abc.ABC):
    """Abstract class from which all batch transforms should inherit."""

    @abc.abstractmethod
    def __call__(self, x, y, rng):
        """Transform a batch.

        Args:
            x: Float array [N, H, W, 3].
            y: Soft targets [N, C].
            rng: numpy Generator.

        Returns:
            x', y'.
        """


class Identity(AbstractTransform):

    def __call__(self, x, y, rng):
        return x, y


class FixedTransform(AbstractTransform):
    """Returns images computed ahead of time, e.g. once per epoch."""

    def __init__(self, images):
        self._images = np.asarray(images, dtype=np.float32)

    def __call__(self, x, y, rng):
        if len(self._images) != len(x):
            raise ValueError('precomputed batch has {} images, got {}'.format(
                len(self._images), len(x)))
        return self._images, y


class Compose(AbstractTransform):
    """Applies transforms left to right."""

    def __init__(self, *transforms):
        self._transforms = transforms

    def __call__(self, x, y, rng):
        for t in self._transforms:
            x, y = t(x, y, rng)
        return x, y


class Mixup(AbstractTransform):
    """Mixes the batch with a random permutation of itself."""

    def __init__(self, alpha):
        self._alpha = alpha

    def __call__(self, x, y, rng):
        perm = rng.permutation(len(x))
        return baselines.mixup_batch(x, y, x[perm], y[perm], self._alpha, rng)


class Cutmix(AbstractTransform):
    """Pastes a box of a random permutation of the batch."""

    def __init__(self, alpha):
        self._alpha = alpha

    def __call__(self, x, y, rng):
        perm = rng.permutation(len(x))
        return baselines.cutmix_batch(x, y, x[perm], y[perm], self._alpha, rng)


class Cutout(AbstractTransform):

    def __init__(self, size, fill):
        self._size = size
        self._fill = fill

    def __call__(self, x, y, rng):
        return baselines.cutout(x, self._size, self._fill, rng), y


class FlowGaussian(AbstractTransform):
    """Transform family T1, computed on the fly."""

    def __init__(self, model, perturb_spec):
        self._model = model
        self._spec = perturb_spec

    def __call__(self, x, y, rng):
        return flow_transforms.augment_gaussian(
            self._model, x, self._spec, rng), y


class FlowMix(AbstractTransform):
    """Transform family T2 with partners from a permutation of the batch."""

    def __init__(self, model, mix_spec):
        self._model = model
        self._spec = mix_spec

    def __call__(self, x, y, rng):
        perm = rng.permutation(len(x))
        return flow_transforms.augment_mix(
            self._model, x, x[perm], self._spec, rng), y
