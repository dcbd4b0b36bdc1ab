"""Tests for flowaug/augment/transforms.py and batch.py.

To run this test, navigate to this directory and run
```bash
$ pytest test_transforms.py
```
"""

import sys
sys.path.insert(0, '../../..')  # Allow imports from flowaug codebase

import json

import numpy as np
import pytest
from scipy import stats
import torch
from torch import nn

from flowaug import errors
from flowaug.augment import batch
from flowaug.augment import perturbations
from flowaug.augment import transforms
from flowaug.flowcore import flow_model
from flowaug.synthdata import generator
from flowaug.synthdata import palettes


def _model(perturb=True):
    torch.manual_seed(0)
    model = flow_model.FlowModel(image_shape=(4, 4, 3), d_z=4, num_blocks=4,
                                 hidden_channels=8, cond_channels=4,
                                 encoder_channels=8)
    if perturb:
        for block in model.blocks:
            nn.init.normal_(block.network.net[-1].weight, std=0.1)
    model.eval()
    return model


def _images(n, seed=0):
    rng = np.random.default_rng(seed)
    return (rng.integers(0, 256, size=(n, 4, 4, 3)) / 255.).astype(np.float32)


def _dataset(n=12):
    train = generator.LabeledSplit('train', _images(n), np.arange(n) % 3,
                                   np.arange(n) % 4)
    test = generator.LabeledSplit('test', _images(6, seed=1),
                                  np.arange(6) % 3, np.arange(6) % 4)
    return generator.Dataset(train, test, num_classes=3,
                             palette=palettes.Palette(['blue', 'green', 'red',
                                                       'yellow']),
                             rho=0.9, seed=0)


class _BackgroundCodeFlow(flow_model.FlowModel):
    """Flow whose global code is the mean background logit of each channel.

    The local code is the image minus the global code in logit space, so
    decoding with another image's code recolors the background.
    """

    def __init__(self, image_size):
        super(_BackgroundCodeFlow, self).__init__(
            image_shape=(image_size, image_size, 3), d_z=3, num_blocks=1,
            hidden_channels=4, cond_channels=2, encoder_channels=4)
        self._foreground = torch.tensor(
            palettes.DEFAULT_FOREGROUND_RGB,
            dtype=torch.float32).view(1, 3, 1, 1) / 255.
        self.eval()

    def posterior(self, x):
        y, _ = self.preprocessing.forward(x)
        background = (x - self._foreground).abs().amax(dim=1, keepdim=True)
        background = (background > 1e-3).to(y.dtype)
        mu = (y * background).sum(dim=(2, 3)) / background.sum(dim=(2, 3))
        return mu, torch.zeros_like(mu)

    def flow_forward(self, y, z):
        return y - z[:, :, None, None], torch.zeros(y.shape[0])

    def flow_inverse(self, nu, z):
        return nu + z[:, :, None, None], torch.zeros(nu.shape[0])


def _render_spec():
    return generator.DatasetSpec(num_classes=2, palette=('blue', 'green'),
                                 n_train=8, n_test=4, image_size=16)


class TestTransforms():

    def testGlobalPerturbationIgnoredByIdentityFlow(self):
        model = _model(perturb=False)
        x = _images(3)
        spec = perturbations.PerturbSpec(sigma=1., bound=2.)
        out = transforms.augment_gaussian(model, x, spec,
                                          np.random.default_rng(0))
        np.testing.assert_allclose(out, x, atol=1e-5)

    @pytest.mark.parametrize('target', perturbations.TARGETS)
    def testPerturbationChangesImage(self, target):
        model = _model()
        x = _images(3)
        spec = perturbations.PerturbSpec(sigma=0.5, bound=2., target=target)
        out = transforms.augment_gaussian(model, x, spec,
                                          np.random.default_rng(0))
        assert out.shape == x.shape
        assert out.min() >= 0. and out.max() <= 1.
        assert not np.allclose(out, x, atol=1e-3)

    @pytest.mark.parametrize('target', perturbations.TARGETS)
    def testMixWeightOneIsReconstruction(self, target):
        model = _model()
        x1, x2 = _images(3), _images(3, seed=1)
        spec = perturbations.MixSpec(target=target)
        out = transforms.augment_mix(model, x1, x2, spec,
                                     np.random.default_rng(0), m=1.)
        np.testing.assert_allclose(out, x1, atol=1e-4)

    def testLocalMixWeightZeroGivesPartnerWithIdentityFlow(self):
        model = _model(perturb=False)
        x1, x2 = _images(3), _images(3, seed=1)
        spec = perturbations.MixSpec(tr=0., target=perturbations.LOCAL_NU)
        out = transforms.augment_mix(model, x1, x2, spec,
                                     np.random.default_rng(0), m=0.)
        np.testing.assert_allclose(out, x2, atol=1e-5)

    def testMixCodes(self):
        z1, z2 = np.ones((2, 4)), np.zeros((2, 4))
        nu1, nu2 = np.ones((2, 3)), np.zeros((2, 3))
        z, nu = transforms.mix_codes(z1, nu1, z2, nu2, np.array([0.75, 0.6]),
                                     perturbations.GLOBAL_Z)
        np.testing.assert_allclose(z[:, 0], [0.75, 0.6])
        np.testing.assert_array_equal(nu, nu1)
        z, nu = transforms.mix_codes(z1, nu1, z2, nu2, 0.75,
                                     perturbations.LOCAL_NU)
        np.testing.assert_array_equal(z, z1)
        np.testing.assert_allclose(nu, 0.75)

    def testSwitchOfSelfIsReconstruction(self):
        model = _model()
        x = _images(2)
        np.testing.assert_allclose(transforms.switch(model, x, x),
                                   transforms.reconstruct(model, x),
                                   atol=1e-6)

    def testMixShapeMismatch(self):
        with pytest.raises(errors.InvalidArgumentError):
            transforms.augment_mix(_model(), _images(2), _images(3),
                                   perturbations.MixSpec(),
                                   np.random.default_rng(0))

    def testGlobalPerturbationMovesBackground(self):
        spec = _render_spec()
        model = _BackgroundCodeFlow(spec.image_size)
        perturb = perturbations.PerturbSpec(sigma=0.3, bound=1.)
        rng = np.random.default_rng(0)
        fg_change, bg_change = [], []
        for i in range(60):
            class_label, group = i % 2, (i // 2) % 2
            x = generator.render_example(spec, class_label, group, i)
            mask = generator.render_mask(spec, class_label, i)
            out = transforms.augment_gaussian(model, x, perturb, rng)
            change = np.abs(out - x).mean(axis=-1)
            fg_change.append(change[mask].mean())
            bg_change.append(change[~mask].mean())
        assert np.mean(bg_change) > 0.
        assert np.mean(bg_change) >= np.mean(fg_change)

    @pytest.mark.parametrize('class_label', [0, 1])
    def testSwitchTakesPartnerBackground(self, class_label):
        spec = _render_spec()
        model = _BackgroundCodeFlow(spec.image_size)
        for jitter_seed in range(10):
            x1 = generator.render_example(spec, class_label, 0, jitter_seed)
            x2 = generator.render_example(spec, class_label, 1, jitter_seed)
            background = ~generator.render_mask(spec, class_label,
                                                jitter_seed)
            out = transforms.switch(model, x1, x2)
            to_partner = np.abs(out - x2)[background].mean()
            to_source = np.abs(out - x1)[background].mean()
            assert to_partner < to_source


class TestAugmentBatch():

    @pytest.mark.parametrize('method', batch.METHODS)
    def testIndependentOfWorkers(self, method):
        model = _model()
        spec = batch.AugmentationSpec(method=method, L=10, seed=4,
                                      chunk_size=3)
        a = batch.augment_batch(model, _dataset(), spec)
        b = batch.augment_batch(model, _dataset(), spec, num_workers=3)
        np.testing.assert_array_equal(a.images, b.images)
        np.testing.assert_array_equal(a.source_indices, b.source_indices)

    def testIndependentOfChunkSize(self):
        model = _model()
        a = batch.augment_batch(model, _dataset(), batch.AugmentationSpec(
            method=batch.MIX, L=8, chunk_size=8))
        b = batch.augment_batch(model, _dataset(), batch.AugmentationSpec(
            method=batch.MIX, L=8, chunk_size=1))
        np.testing.assert_array_equal(a.partner_indices, b.partner_indices)
        np.testing.assert_allclose(a.images, b.images, atol=1e-5)

    def testLabelsFollowSources(self):
        data = _dataset()
        out = batch.augment_batch(_model(), data, batch.AugmentationSpec(L=9))
        assert out.images.shape == (9, 4, 4, 3)
        np.testing.assert_array_equal(
            out.class_labels, data.train.class_labels[out.source_indices])
        assert out.partner_indices is None

    def testSameClassPairs(self):
        data = _dataset()
        spec = batch.AugmentationSpec(method=batch.MIX, L=20,
                                      same_class_pairs=True)
        out = batch.augment_batch(_model(), data, spec)
        labels = data.train.class_labels
        np.testing.assert_array_equal(labels[out.source_indices],
                                      labels[out.partner_indices])

    def testSeedChangesOutput(self):
        model = _model()
        a = batch.augment_batch(model, _dataset(),
                                batch.AugmentationSpec(L=6, seed=0))
        b = batch.augment_batch(model, _dataset(),
                                batch.AugmentationSpec(L=6, seed=1))
        assert not np.array_equal(a.images, b.images)

    def testAugmentEach(self):
        data = _dataset(n=5)
        spec = batch.AugmentationSpec(K=2)
        out = batch.augment_each(_model(), data, spec, epoch=0)
        assert out.images.shape == (10, 4, 4, 3)
        np.testing.assert_array_equal(out.source_indices,
                                      [0, 0, 1, 1, 2, 2, 3, 3, 4, 4])
        other = batch.augment_each(_model(), data, spec, epoch=1)
        assert not np.array_equal(out.images, other.images)

    def testViewsDrawIndependentStreams(self):
        data = _dataset(n=5)
        spec = batch.AugmentationSpec(K=2)
        first = batch.augment_each(_model(), data, spec, epoch=0, view=0)
        second = batch.augment_each(_model(), data, spec, epoch=0, view=1)
        again = batch.augment_each(_model(), data, spec, epoch=0, view=1)
        assert not np.array_equal(first.images, second.images)
        np.testing.assert_array_equal(second.images, again.images)

    def testSourceLabelHistogram(self):
        labels = np.array([0] * 6 + [1] * 4 + [2] * 2)
        n, num_outputs = len(labels), 2000
        train = generator.LabeledSplit('train', _images(n), labels,
                                       np.arange(n) % 4)
        out = batch.augment_batch(_model(), train, batch.AugmentationSpec(
            L=num_outputs, chunk_size=250))
        counts = np.bincount(out.class_labels, minlength=3)
        for c, k in enumerate(counts):
            p = np.mean(labels == c)
            p_value = 2 * min(stats.binom.cdf(k, num_outputs, p),
                              stats.binom.sf(k - 1, num_outputs, p))
            assert p_value > 1e-3, (c, k)

    def testEmptyDataset(self):
        empty = generator.LabeledSplit('train', np.zeros((0, 4, 4, 3)), [],
                                       [])
        with pytest.raises(errors.InvalidArgumentError):
            batch.augment_batch(_model(), empty, batch.AugmentationSpec())

    @pytest.mark.parametrize('kwargs', [dict(method='cutmix'), dict(L=0),
                                        dict(K=0), dict(seed=-1)])
    def testInvalidSpec(self, kwargs):
        with pytest.raises(errors.InvalidArgumentError):
            batch.AugmentationSpec(**kwargs).validate()

    def testSpecDictRoundTrip(self):
        spec = batch.AugmentationSpec(
            method=batch.MIX, mix=perturbations.MixSpec(alpha=0.2), L=4)
        assert batch.AugmentationSpec.from_dict(spec.to_dict()) == spec


class TestAugmentedDataset():

    def testTrainSplitAndProvenance(self, tmp_path):
        data = _dataset()
        spec = batch.AugmentationSpec(L=7)
        out = batch.augment_batch(_model(), data, spec)
        record = batch.provenance(spec, 'flow.ckpt', 'data')
        augmented = batch.augmented_dataset(data, out, record)
        assert len(augmented.train) == 7
        np.testing.assert_array_equal(
            augmented.train.bg_groups,
            data.train.bg_groups[out.source_indices])
        assert augmented.test is data.test
        assert augmented.provenance['flow_checkpoint'] == 'flow.ckpt'

        path = str(tmp_path / 'provenance.json')
        batch.write_provenance(path, spec, 'flow.ckpt', 'data')
        with open(path) as f:
            assert json.load(f) == record
