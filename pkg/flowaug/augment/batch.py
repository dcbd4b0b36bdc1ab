"""Batch jobs applying FlowAug transforms to a dataset.

Every output has its own random stream derived from the job seed and the
output's position, and the flow runs on fixed chunks of consecutive outputs.
The result is therefore a pure function of (model, dataset, spec) no matter
how many worker threads share the chunks.
"""

import collections
from concurrent import futures
import dataclasses
import json
import logging
import os

import numpy as np

from flowaug import errors
from flowaug import logs
from flowaug.flowcore import flow_model
from flowaug.synthdata import generator
from . import perturbations
from . import transforms

GAUSSIAN = 'gaussian'
MIX = 'mix'
METHODS = (GAUSSIAN, MIX)

AugmentedBatch = collections.namedtuple(
    'AugmentedBatch', ['images', 'class_labels', 'source_indices',
                       'partner_indices'])


@dataclasses.dataclass
class AugmentationSpec:
    """What to generate and how.

    Fields:
        method: 'gaussian' (T1, uses perturb) or 'mix' (T2, uses mix).
        perturb: Instance of perturbations.PerturbSpec.
        mix: Instance of perturbations.MixSpec.
        K: Transforms per source image, for per-epoch training sets.
        L: Total number of outputs of a batch job.
        seed: Non-negative int.
        same_class_pairs: If True, mix partners share the source's class.
            Partners are drawn from the whole dataset otherwise.
        chunk_size: Outputs per flow evaluation.
    """
    method: str = GAUSSIAN
    perturb: perturbations.PerturbSpec = dataclasses.field(
        default_factory=perturbations.PerturbSpec)
    mix: perturbations.MixSpec = dataclasses.field(
        default_factory=perturbations.MixSpec)
    K: int = 1
    L: int = 1
    seed: int = 0
    same_class_pairs: bool = False
    chunk_size: int = 64

    def validate(self):
        if self.method not in METHODS:
            raise errors.InvalidArgumentError(
                'method must be one of {}, got {!r}'.format(
                    METHODS, self.method))
        if self.K < 1 or self.L < 1:
            raise errors.InvalidArgumentError(
                'K and L must be at least 1, got K={}, L={}'.format(
                    self.K, self.L))
        if self.seed < 0:
            raise errors.InvalidArgumentError('seed must be non-negative')
        if self.chunk_size < 1:
            raise errors.InvalidArgumentError('chunk_size must be positive')
        if self.method == GAUSSIAN:
            self.perturb.validate()
        else:
            self.mix.validate()

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise errors.ConfigError(
                'unknown augmentation keys {}'.format(sorted(unknown)))
        try:
            if isinstance(d.get('perturb'), dict):
                d['perturb'] = perturbations.PerturbSpec(**d['perturb'])
            if isinstance(d.get('mix'), dict):
                d['mix'] = perturbations.MixSpec(**d['mix'])
        except TypeError as e:
            raise errors.ConfigError(str(e))
        return cls(**d)


def output_rng(*key):
    """Random stream of one output, derived from integer key parts."""
    return np.random.default_rng(
        np.random.SeedSequence([int(k) for k in key]))


def _partner(rng, source, class_labels, by_class):
    if by_class is None:
        return int(rng.integers(len(class_labels)))
    candidates = by_class[int(class_labels[source])]
    return int(candidates[rng.integers(len(candidates))])


def _transform_chunk(model, spec, images, sources, partners, rngs):
    """Transform images[sources] (mixed with images[partners]) in one pass."""
    x1 = images[sources]
    z1, nu1 = flow_model.encode(model, x1)
    if spec.method == GAUSSIAN:
        z, nu = z1.copy(), nu1.copy()
        for r, rng in enumerate(rngs):
            z[r], nu[r] = transforms.perturb_codes(z1[r], nu1[r],
                                                   spec.perturb, rng)
    else:
        z2, nu2 = flow_model.encode(model, images[partners])
        m = np.array([spec.mix.sample_weight(rng) for rng in rngs])
        z, nu = transforms.mix_codes(z1, nu1, z2, nu2, m, spec.mix.target)
    return flow_model.decode(model, z, nu)


def _run_chunks(model, spec, images, sources, partners, rngs, num_workers):
    size = spec.chunk_size
    bounds = [(s, min(s + size, len(sources)))
              for s in range(0, len(sources), size)]

    def run(bound):
        lo, hi = bound
        return _transform_chunk(
            model, spec, images, sources[lo:hi],
            None if partners is None else partners[lo:hi], rngs[lo:hi])

    if num_workers > 1:
        with futures.ThreadPoolExecutor(max_workers=num_workers) as pool:
            chunks = list(pool.map(run, bounds))
    else:
        chunks = [run(b) for b in bounds]
    return np.concatenate(chunks).astype(np.float32)


def _class_index(class_labels):
    by_class = collections.defaultdict(list)
    for i, c in enumerate(class_labels):
        by_class[int(c)].append(i)
    return {c: np.asarray(v) for c, v in by_class.items()}


def _unpack(data):
    if hasattr(data, 'train'):
        data = data.train
    images = np.asarray(data.images, dtype=np.float32)
    labels = np.asarray(data.class_labels, dtype=np.int64)
    if len(images) == 0:
        raise errors.InvalidArgumentError('cannot augment an empty dataset')
    return images, labels


def augment_batch(model, data, spec, num_workers=1):
    """Generate spec.L augmented examples from uniformly drawn sources.

    Args:
        model: Instance of flow_model.FlowModel.
        data: LabeledSplit or Dataset (its train split is used).
        spec: Instance of AugmentationSpec.
        num_workers: Int. Threads sharing the chunks. Does not affect output.

    Returns:
        AugmentedBatch. class_labels[l] is the label of source_indices[l];
        partner_indices is None for the gaussian method.
    """
    spec.validate()
    images, labels = _unpack(data)
    by_class = _class_index(labels) if spec.same_class_pairs else None
    rngs = [output_rng(spec.seed, l) for l in range(spec.L)]
    sources = np.array([int(rng.integers(len(images))) for rng in rngs],
                       dtype=np.int64)
    partners = None
    if spec.method == MIX:
        partners = np.array(
            [_partner(rng, s, labels, by_class)
             for rng, s in zip(rngs, sources)], dtype=np.int64)
    out = _run_chunks(model, spec, images, sources, partners, rngs,
                      num_workers)
    logging.info('Augmented {} outputs with method {}.'.format(
        spec.L, spec.method))
    return AugmentedBatch(out, labels[sources].copy(), sources, partners)


def augment_each(model, data, spec, epoch=0, num_workers=1, view=0):
    """Generate spec.K transforms of every source image.

    Output i * K + k is transform k of source i, seeded by
    (seed, epoch, view, i, k), so each epoch of training sees fresh transforms
    and views of one epoch draw independent streams.

    Args:
        model: Instance of flow_model.FlowModel.
        data: LabeledSplit or Dataset (its train split is used).
        spec: Instance of AugmentationSpec. spec.L is ignored.
        epoch: Int. Mixed into every output's seed.
        num_workers: Int. Threads sharing the chunks.
        view: Non-negative int tagging one of several views generated for the
            same epoch.

    Returns:
        AugmentedBatch of N * K outputs.
    """
    spec.validate()
    images, labels = _unpack(data)
    by_class = _class_index(labels) if spec.same_class_pairs else None
    sources = np.repeat(np.arange(len(images), dtype=np.int64), spec.K)
    rngs = [output_rng(spec.seed, epoch, view, i, k)
            for i in range(len(images)) for k in range(spec.K)]
    partners = None
    if spec.method == MIX:
        partners = np.array(
            [_partner(rng, s, labels, by_class)
             for rng, s in zip(rngs, sources)], dtype=np.int64)
    out = _run_chunks(model, spec, images, sources, partners, rngs,
                      num_workers)
    return AugmentedBatch(out, labels[sources].copy(), sources, partners)


def provenance(spec, flow_path=None, input_path=None):
    """JSON-ready record of how an augmented dataset was produced."""
    return logs.serialize({
        'augmentation': spec.to_dict(),
        'flow_checkpoint': flow_path,
        'input_dataset': input_path,
    })


def write_provenance(path, spec, flow_path=None, input_path=None):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(provenance(spec, flow_path, input_path), f, indent=2,
                  sort_keys=True)


def augmented_dataset(data, augmented, provenance_record=None):
    """Dataset whose train split is an AugmentedBatch and test split is data's.

    Augmented examples keep the background group of their source image, which
    is only a label of where they came from: mixing may change the background.

    Args:
        data: synthdata Dataset the batch was generated from.
        augmented: Instance of AugmentedBatch.
        provenance_record: Optional dict stored in the dataset's metadata.

    Returns:
        synthdata Dataset.
    """
    train = generator.LabeledSplit(
        'train', augmented.images, augmented.class_labels,
        data.train.bg_groups[augmented.source_indices])
    return generator.Dataset(train, data.test, num_classes=data.num_classes,
                             palette=data.palette, rho=data.rho,
                             seed=data.seed, provenance=provenance_record)
