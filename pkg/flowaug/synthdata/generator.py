"""Generators for subgroup-annotated datasets with spurious backgrounds.

Every example's randomness is derived from (seed, split, index) through a numpy
SeedSequence, so examples can be generated in any order or in parallel and the
output is a pure function of the DatasetSpec.

Example usage:
    ```python
    spec = generator.DatasetSpec(
        num_classes=4, palette=palettes.DEFAULT_PALETTE[:6],
        n_train=6000, n_test=1200, rho=0.95, seed=0)
    train, test = generator.generate_dataset(spec)
    ```
"""

import collections
from concurrent import futures
import dataclasses
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from flowaug import errors
from . import distributions as distribs
from . import palettes
from . import renderer as renderer_lib
from . import shapes

SPLITS = ('train', 'test')
_SPLIT_TAGS = {'train': 0, 'test': 1}

LabeledExample = collections.namedtuple(
    'LabeledExample', ['image', 'class_label', 'bg_group'])


@dataclasses.dataclass
class DatasetSpec:
    """Parameters of a synthetic dataset.

    Fields:
        num_classes: Number of classes C.
        palette: Named colors (without "others") backgrounds are drawn from.
        shapes: One key of shapes.SHAPES per class. Defaults to the first C of
            shapes.DEFAULT_CLASS_SHAPES.
        n_train: Number of training examples.
        n_test: Number of test examples.
        rho: Spurious-correlation strength in [0, 1].
        seed: Non-negative 64-bit seed.
        image_size: Height and width in pixels.
        class_colors: Palette index assigned to each class. Defaults to class c
            getting color c modulo the number of colors.
        foreground_rgb: Fill color of every foreground shape.
    """
    num_classes: int = 4
    palette: Sequence[str] = palettes.DEFAULT_PALETTE
    shapes: Optional[Sequence[str]] = None
    n_train: int = 6000
    n_test: int = 1200
    rho: float = 0.95
    seed: int = 0
    image_size: int = 32
    class_colors: Optional[Sequence[int]] = None
    foreground_rgb: Tuple[int, int, int] = palettes.DEFAULT_FOREGROUND_RGB

    def __post_init__(self):
        self.palette = tuple(self.palette)
        if self.shapes is None:
            self.shapes = shapes.DEFAULT_CLASS_SHAPES[:self.num_classes]
        self.shapes = tuple(self.shapes)
        if self.class_colors is None:
            self.class_colors = tuple(
                c % len(self.palette) for c in range(self.num_classes))
        self.class_colors = tuple(int(c) for c in self.class_colors)
        self.foreground_rgb = tuple(int(c) for c in self.foreground_rgb)

    def validate(self):
        """Raise errors.InvalidArgumentError if the fields are inconsistent."""
        if self.num_classes < 1:
            raise errors.InvalidArgumentError(
                'num_classes must be positive, got {}'.format(self.num_classes))
        if len(self.shapes) != self.num_classes:
            raise errors.InvalidArgumentError(
                'need one shape per class: {} shapes for {} classes'.format(
                    len(self.shapes), self.num_classes))
        if len(set(self.shapes)) != len(self.shapes):
            raise errors.InvalidArgumentError(
                'class shapes must be distinct, got {}'.format(self.shapes))
        if not 0. <= self.rho <= 1.:
            raise errors.InvalidArgumentError(
                'rho must be in [0, 1], got {}'.format(self.rho))
        if self.n_train <= 0 or self.n_test <= 0:
            raise errors.InvalidArgumentError(
                'n_train and n_test must be positive, got {} and {}'.format(
                    self.n_train, self.n_test))
        if self.seed < 0:
            raise errors.InvalidArgumentError(
                'seed must be non-negative, got {}'.format(self.seed))
        if len(self.class_colors) != self.num_classes:
            raise errors.InvalidArgumentError(
                'need one class color per class, got {}'.format(
                    self.class_colors))
        palette = self.make_palette()
        for c in self.class_colors:
            palette.check_index(c, allow_others=False)
        for i in range(palette.num_colors):
            palette.region(i)

    def make_palette(self):
        return palettes.Palette(self.palette)

    def make_renderer(self):
        return renderer_lib.ExampleRenderer(
            palette=self.make_palette(),
            class_shapes=self.shapes,
            image_size=(self.image_size, self.image_size),
            foreground_rgb=self.foreground_rgb,
        )

    def to_dict(self):
        d = dataclasses.asdict(self)
        for k in ('palette', 'shapes', 'class_colors', 'foreground_rgb'):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise errors.ConfigError(
                'unknown dataset spec keys {}'.format(sorted(unknown)))
        return cls(**d)


class LabeledSplit(object):
    """One split of a dataset, stored as stacked arrays.

    Indexing yields LabeledExample tuples, so a split behaves as a sequence of
    examples while keeping images contiguous for batching.
    """

    def __init__(self, name, images, class_labels, bg_groups):
        """Constructor.

        Args:
            name: String split name.
            images: Float32 array [N, H, W, 3] with values in [0, 1].
            class_labels: Int array [N].
            bg_groups: Int array [N] of palette indices.
        """
        self.name = name
        self.images = np.asarray(images, dtype=np.float32)
        self.class_labels = np.asarray(class_labels, dtype=np.int64)
        self.bg_groups = np.asarray(bg_groups, dtype=np.int64)
        n = len(self.images)
        if len(self.class_labels) != n or len(self.bg_groups) != n:
            raise errors.InvalidArgumentError(
                'split {} has {} images, {} labels and {} groups'.format(
                    name, n, len(self.class_labels), len(self.bg_groups)))

    def __len__(self):
        return len(self.images)

    def __getitem__(self, index):
        return LabeledExample(
            self.images[index], int(self.class_labels[index]),
            int(self.bg_groups[index]))

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledSplit(self.name, self.images[indices],
                            self.class_labels[indices], self.bg_groups[indices])

    def cell_counts(self, num_classes, num_groups):
        """Matrix [num_classes, num_groups] of example counts."""
        counts = np.zeros((num_classes, num_groups), dtype=np.int64)
        np.add.at(counts, (self.class_labels, self.bg_groups), 1)
        return counts


class Dataset(object):
    """Train and test splits plus the metadata needed to interpret them.

    Iterating yields (train, test), so `train, test = dataset` works.
    """

    def __init__(self, train, test, num_classes, palette, rho=None, seed=None,
                 spec=None, provenance=None):
        self.train = train
        self.test = test
        self.num_classes = num_classes
        self.palette = palette
        self.rho = rho
        self.seed = seed
        self.spec = spec
        self.provenance = provenance

    def __iter__(self):
        yield self.train
        yield self.test

    @property
    def image_shape(self):
        split = self.train if len(self.train) else self.test
        return tuple(split.images.shape[1:])


def example_rng(seed, split, index):
    """Random stream of one example, derived from (seed, split, index)."""
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), _SPLIT_TAGS[split], int(index)]))


def sample_assignments(spec, split):
    """Labels, groups and jitter seeds of a split, without rendering.

    Training examples cycle through the classes and draw their background from
    distributions.biased_background. Test examples enumerate the
    (class, color) cells in order, so the test cell counts are balanced for
    every rho.

    Args:
        spec: Instance of DatasetSpec.
        split: 'train' or 'test'.

    Returns:
        class_labels, bg_groups, jitter_seeds: Int arrays of the split length.
    """
    num_colors = len(spec.palette)
    colors = list(range(num_colors))
    n = spec.n_train if split == 'train' else spec.n_test
    class_labels = np.empty(n, dtype=np.int64)
    bg_groups = np.empty(n, dtype=np.int64)
    jitter_seeds = np.empty(n, dtype=np.int64)
    backgrounds = [
        distribs.biased_background(spec.class_colors[c], colors, spec.rho)
        for c in range(spec.num_classes)
    ]
    for i in range(n):
        rng = example_rng(spec.seed, split, i)
        if split == 'train':
            class_labels[i] = i % spec.num_classes
            bg_groups[i] = backgrounds[class_labels[i]].sample(rng)['bg_group']
        else:
            cell = i % (spec.num_classes * num_colors)
            class_labels[i] = cell // num_colors
            bg_groups[i] = cell % num_colors
        jitter_seeds[i] = rng.integers(0, 2**31 - 1)
    return class_labels, bg_groups, jitter_seeds


def _render_split(spec, split, num_workers):
    render = spec.make_renderer()
    class_labels, bg_groups, jitter_seeds = sample_assignments(spec, split)
    args = list(zip(class_labels, bg_groups, jitter_seeds))
    if num_workers > 1:
        with futures.ThreadPoolExecutor(max_workers=num_workers) as pool:
            images = list(pool.map(lambda a: render(*a), args))
    else:
        images = [render(*a) for a in args]
    size = (spec.image_size, spec.image_size, 3)
    images = np.stack(images) if images else np.zeros((0,) + size, np.float32)
    return LabeledSplit(split, images, class_labels, bg_groups)


def generate_dataset(spec, num_workers=1):
    """Generate train and test splits from a spec.

    Args:
        spec: Instance of DatasetSpec.
        num_workers: Int. Rendering threads. Does not affect the output.

    Returns:
        Instance of Dataset, which unpacks as (train, test).
    """
    spec.validate()
    num_cells = spec.num_classes * len(spec.palette)
    if spec.n_test % num_cells:
        logging.warning(
            'n_test={} is not a multiple of {} (class, color) cells; cell '
            'counts will differ by one.'.format(spec.n_test, num_cells))
    train = _render_split(spec, 'train', num_workers)
    test = _render_split(spec, 'test', num_workers)
    logging.info('Generated {} train and {} test examples (rho={}, seed={}).'
                 .format(len(train), len(test), spec.rho, spec.seed))
    return Dataset(train, test, num_classes=spec.num_classes,
                   palette=spec.make_palette(), rho=spec.rho, seed=spec.seed,
                   spec=spec)


def render_example(spec, class_label, bg_group, jitter_seed):
    """Render a single example of a spec. See renderer.ExampleRenderer."""
    return spec.make_renderer()(class_label, bg_group, jitter_seed)


def render_mask(spec, class_label, jitter_seed):
    """Boolean foreground mask of the example render_example would draw."""
    return spec.make_renderer().mask(class_label, jitter_seed)
