"""Tests for flowaug/synthdata/generator.py and renderer.py.

To run this test, navigate to this directory and run
```bash
$ pytest test_generator.py
```
"""

import sys
sys.path.insert(0, '../../..')  # Allow imports from flowaug codebase

from matplotlib import colors as mcolors
import numpy as np
import pytest

from flowaug import errors
from flowaug.synthdata import distributions
from flowaug.synthdata import generator
from flowaug.synthdata import palettes

_HUE_ATOL = 0.01
_SV_ATOL = 0.02


def _spec(**kwargs):
    fields = dict(num_classes=2, palette=('blue', 'green', 'red'), n_train=20,
                  n_test=12, rho=0.9, seed=0, image_size=8)
    fields.update(kwargs)
    return generator.DatasetSpec(**fields)


class TestDatasetSpec():

    def testDefaults(self):
        spec = generator.DatasetSpec()
        spec.validate()
        assert spec.shapes == ('circle', 'square', 'triangle', 'cross')
        assert spec.class_colors == (0, 1, 2, 3)
        assert spec.foreground_rgb == (230, 25, 230)

    @pytest.mark.parametrize('kwargs', [
        dict(rho=1.5),
        dict(rho=-0.1),
        dict(n_test=0),
        dict(seed=-1),
        dict(shapes=('circle', 'circle')),
        dict(class_colors=(0, 3)),
        dict(palette=('blue', 'plaid')),
    ])
    def testInvalid(self, kwargs):
        with pytest.raises(errors.InvalidArgumentError):
            _spec(**kwargs).validate()

    def testDictRoundTrip(self):
        spec = _spec()
        assert generator.DatasetSpec.from_dict(spec.to_dict()) == spec

    def testUnknownKey(self):
        with pytest.raises(errors.ConfigError):
            generator.DatasetSpec.from_dict({'num_clases': 3})


class TestAssignments():

    def testTestCellsBalanced(self):
        spec = _spec(n_test=30, rho=1.)
        labels, groups, _ = generator.sample_assignments(spec, 'test')
        counts = np.zeros((2, 3), dtype=int)
        np.add.at(counts, (labels, groups), 1)
        assert np.all(counts == 5)

    def testFullCorrelation(self):
        spec = _spec(n_train=50, rho=1.)
        labels, groups, _ = generator.sample_assignments(spec, 'train')
        assert np.array_equal(groups, np.asarray(spec.class_colors)[labels])

    def testCorrelationStrength(self):
        spec = _spec(palette=('blue', 'green', 'red', 'yellow'), n_train=4000,
                     rho=0.5)
        labels, groups, _ = generator.sample_assignments(spec, 'train')
        matches = np.mean(groups == np.asarray(spec.class_colors)[labels])
        assert matches == pytest.approx(0.5 + 0.5 / 4, abs=0.03)

    def testNoOthersInTrainOrTest(self):
        spec = _spec(rho=0.)
        for split in generator.SPLITS:
            _, groups, _ = generator.sample_assignments(spec, split)
            assert np.all(groups < 3)

    @pytest.mark.parametrize('seed', [0, 1])
    def testUncorrelatedBackgroundsUniform(self, seed):
        n = 6000
        spec = _spec(num_classes=4, n_train=n, rho=0., seed=seed,
                     palette=('blue', 'green', 'red', 'yellow', 'white',
                              'black'))
        _, groups, _ = generator.sample_assignments(spec, 'train')
        counts = np.bincount(groups, minlength=6)
        p = 1. / 6
        band = 3 * np.sqrt(n * p * (1 - p))
        assert counts.sum() == n
        assert np.all(np.abs(counts - n * p) <= band)

    def testBiasedBackground(self):
        d = distributions.biased_background(1, [0, 1, 2], rho=0.3)
        assert d.keys == {'bg_group'}
        rng = np.random.default_rng(0)
        draws = [d.sample(rng)['bg_group'] for _ in range(2000)]
        assert set(draws) == {0, 1, 2}
        assert np.mean(np.equal(draws, 1)) == pytest.approx(
            0.3 + 0.7 / 3, abs=0.04)


class TestGenerateDataset():

    def testShapes(self):
        train, test = generator.generate_dataset(_spec())
        assert train.images.shape == (20, 8, 8, 3)
        assert test.images.shape == (12, 8, 8, 3)
        assert train.images.dtype == np.float32
        assert train.images.min() >= 0. and train.images.max() <= 1.

    def testDeterministic(self):
        a = generator.generate_dataset(_spec())
        b = generator.generate_dataset(_spec(), num_workers=3)
        for split_a, split_b in zip(a, b):
            np.testing.assert_array_equal(split_a.images, split_b.images)
            np.testing.assert_array_equal(split_a.class_labels,
                                          split_b.class_labels)
            np.testing.assert_array_equal(split_a.bg_groups,
                                          split_b.bg_groups)

    def testSeedChangesImages(self):
        a = generator.generate_dataset(_spec(seed=0))
        b = generator.generate_dataset(_spec(seed=1))
        assert not np.array_equal(a.train.images, b.train.images)

    def testCellCounts(self):
        dataset = generator.generate_dataset(_spec(n_test=24))
        counts = dataset.test.cell_counts(2, len(dataset.palette))
        assert np.all(counts[:, :3] == 4)
        assert np.all(counts[:, 3] == 0)


class TestRenderer():

    @pytest.mark.parametrize('class_label', [0, 1])
    def testForegroundIndependentOfBackground(self, class_label):
        spec = _spec(image_size=16)
        mask = generator.render_mask(spec, class_label, jitter_seed=7)
        assert mask.any() and not mask.all()
        fg = np.array(palettes.DEFAULT_FOREGROUND_RGB) / 255.
        images = [generator.render_example(spec, class_label, g, 7)
                  for g in range(3)]
        for image in images:
            np.testing.assert_allclose(image[mask],
                                       np.tile(fg, (mask.sum(), 1)),
                                       atol=1e-6)
        assert not np.allclose(images[0][~mask], images[1][~mask])

    @pytest.mark.parametrize('seed', [0, 1, 2])
    def testBackgroundInGroupRegion(self, seed):
        spec = _spec(num_classes=4, palette=palettes.DEFAULT_PALETTE,
                     image_size=16)
        palette = spec.make_palette()
        for i in range(100):
            group = i % palette.num_colors
            jitter_seed = 1000 * seed + i
            image = generator.render_example(spec, i % 4, group, jitter_seed)
            mask = generator.render_mask(spec, i % 4, jitter_seed)
            hsv = mcolors.rgb_to_hsv(image[~mask])
            region = palettes.DEFAULT_COLOR_REGIONS[palette.name(group)]
            low, high = region.hue
            if high - low < 1.:
                # Distance from the interval center, modulo 1 for red
                center = 0.5 * (low + high)
                offset = np.abs(np.mod(hsv[:, 0] - center + 0.5, 1.) - 0.5)
                assert offset.max() <= 0.5 * (high - low) + _HUE_ATOL
                assert hsv[:, 1].min() >= region.saturation[0] - _SV_ATOL
            elif region.value[0] >= 0.4:
                # Saturation of dark pixels is dominated by quantization
                assert hsv[:, 1].max() <= region.saturation[1] + _SV_ATOL
            assert hsv[:, 2].min() >= region.value[0] - _SV_ATOL
            assert hsv[:, 2].max() <= region.value[1] + _SV_ATOL

    @pytest.mark.parametrize('seed', [0, 1, 2])
    def testForegroundCoverage(self, seed):
        spec = _spec(num_classes=4, palette=palettes.DEFAULT_PALETTE,
                     image_size=32)
        for i in range(100):
            mask = generator.render_mask(spec, i % 4, 1000 * seed + i)
            assert 0.2 <= mask.mean() <= 0.6

    def testOthersCannotBeRendered(self):
        with pytest.raises(errors.InvalidArgumentError):
            generator.render_example(_spec(), 0, 3, 0)

    def testClassOutOfRange(self):
        with pytest.raises(errors.InvalidArgumentError):
            generator.render_example(_spec(), 2, 0, 0)

    def testObservationSpec(self):
        renderer = _spec(image_size=16).make_renderer()
        spec = renderer.observation_spec()
        assert spec.shape == (16, 16, 3)
        spec.validate(renderer(0, 0, 3))


class TestPalette():

    def testOthersLast(self):
        palette = palettes.Palette(['blue', 'red'])
        assert palette.names == ('blue', 'red', palettes.OTHERS)
        assert palette.others_index == 2

    def testResolve(self):
        palette = palettes.Palette(['blue', 'gray'], aliases={'grey': 'gray'})
        assert palette.resolve(' Blue ') == 0
        assert palette.resolve('grey') == 1
        assert palette.resolve('teal') is None

    @pytest.mark.parametrize('names', [['blue'], ['blue', 'blue'],
                                       ['blue', 'Red'], ['blue', 'others']])
    def testInvalidNames(self, names):
        with pytest.raises(errors.InvalidArgumentError):
            palettes.Palette(names)
