"""Tests for flowaug/trainer/baselines.py and train_transforms.py.

To run this test, navigate to this directory and run
```bash
$ pytest test_baselines.py
```
"""

import sys
sys.path.insert(0, '../../..')  # Allow imports from flowaug codebase

import numpy as np
import pytest

from flowaug import errors
from flowaug.trainer import baselines
from flowaug.trainer import train_transforms


def _pair(n=None, size=32):
    shape = (size, size, 3) if n is None else (n, size, size, 3)
    return np.zeros(shape, np.float32), np.ones(shape, np.float32)


class TestMixup():

    def testFixedWeight(self):
        x1, x2 = _pair()
        x, y = baselines.mixup_batch(x1, [1., 0.], x2, [0., 1.], 1.,
                                     np.random.default_rng(0), lam=0.3)
        np.testing.assert_allclose(x, 0.7)
        np.testing.assert_allclose(y, [0.3, 0.7])

    def testTargetsOnSimplex(self):
        rng = np.random.default_rng(0)
        y1 = np.eye(3)[[0, 1, 2, 0]]
        y2 = np.eye(3)[[1, 1, 0, 2]]
        x1, x2 = _pair(4, size=4)
        for _ in range(20):
            _, y = baselines.mixup_batch(x1, y1, x2, y2, 0.4, rng)
            assert np.all(y >= 0.)
            np.testing.assert_allclose(y.sum(axis=1), 1.)

    def testInvalidAlpha(self):
        x1, x2 = _pair()
        with pytest.raises(errors.InvalidArgumentError):
            baselines.mixup_batch(x1, [1., 0.], x2, [0., 1.], 0.,
                                  np.random.default_rng(0))


class TestCutmix():

    def testCentralBox(self):
        x1, x2 = _pair()
        x, y = baselines.cutmix_batch(x1, [1., 0.], x2, [0., 1.], 1.,
                                      np.random.default_rng(0),
                                      box=(8, 24, 8, 24))
        np.testing.assert_allclose(y, [0.75, 0.25])
        assert x.sum() == 16 * 16 * 3
        assert np.all(x[8:24, 8:24] == 1.)

    @pytest.mark.parametrize('seed', range(5))
    def testTargetsMatchPastedArea(self, seed):
        x1, x2 = _pair(size=16)
        x, y = baselines.cutmix_batch(x1, [1., 0.], x2, [0., 1.], 1.,
                                      np.random.default_rng(seed))
        pasted = x[..., 0].mean()
        np.testing.assert_allclose(y, [1. - pasted, pasted], atol=1e-12)

    def testBoxClippedAtBorder(self):
        top, bottom, left, right = baselines._clipped_box(0, 31, 8, 8, 32, 32)
        assert (top, bottom, left, right) == (0, 4, 27, 32)

    def testShapeMismatch(self):
        with pytest.raises(errors.InvalidArgumentError):
            baselines.cutmix_batch(np.zeros((4, 4, 3)), [1.],
                                   np.zeros((5, 4, 3)), [1.], 1.,
                                   np.random.default_rng(0))


class TestCutout():

    def testInterior(self):
        x, _ = _pair()
        out = baselines.cutout(x + 1., 4, 0., np.random.default_rng(0),
                               center=(10, 10))
        assert (out[..., 0] == 0.).sum() == 16
        assert np.all(out[8:12, 8:12] == 0.)

    def testCorner(self):
        x = np.ones((32, 32, 3), np.float32)
        out = baselines.cutout(x, 4, 0.5, np.random.default_rng(0),
                               center=(0, 0))
        assert (out[..., 0] == 0.5).sum() == 4
        assert np.all(x == 1.)

    def testZeroSize(self):
        x = np.ones((2, 8, 8, 3), np.float32)
        np.testing.assert_array_equal(
            baselines.cutout(x, 0, 0., np.random.default_rng(0)), x)

    def testNegativeSize(self):
        with pytest.raises(errors.InvalidArgumentError):
            baselines.cutout(np.ones((8, 8, 3)), -1, 0.,
                             np.random.default_rng(0))


class TestTrainTransforms():

    def testCutoutKeepsTargets(self):
        x = np.ones((3, 8, 8, 3), np.float32)
        y = np.eye(3)
        _, y_out = train_transforms.Cutout(4, 0.)(x, y,
                                                  np.random.default_rng(0))
        np.testing.assert_array_equal(y_out, y)

    @pytest.mark.parametrize('transform', [train_transforms.Mixup(1.),
                                           train_transforms.Cutmix(1.)])
    def testBatchTargetsOnSimplex(self, transform):
        rng = np.random.default_rng(0)
        x = rng.uniform(size=(6, 8, 8, 3)).astype(np.float32)
        y = np.eye(3)[[0, 1, 2, 0, 1, 2]]
        x_out, y_out = transform(x, y, rng)
        assert x_out.shape == x.shape
        np.testing.assert_allclose(y_out.sum(axis=1), 1.)
        assert np.all(y_out >= 0.)

    def testCompose(self):
        images = np.full((2, 4, 4, 3), 0.25, np.float32)
        t = train_transforms.Compose(train_transforms.Identity(),
                                     train_transforms.FixedTransform(images))
        x, y = t(np.zeros((2, 4, 4, 3)), np.eye(2), np.random.default_rng(0))
        np.testing.assert_array_equal(x, images)
        np.testing.assert_array_equal(y, np.eye(2))
