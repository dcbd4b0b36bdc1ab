"""Reading and writing datasets in the on-disk directory format.

A dataset directory contains:
    meta.json   -- num_classes, height, width, palette, rho, seed, counts.
    images.bin  -- concatenated row-major H x W x 3 uint8 images, train first.
    labels.csv  -- columns index,split,class_label,bg_group (group name).

Images in memory are float32 k / 255, so a save/load round trip is bit exact.
"""

import json
import logging
import os

import numpy as np
import pandas as pd

from flowaug import errors
from flowaug import logs
from . import generator
from . import palettes

FORMAT_NAME = 'flowaug-dataset'
FORMAT_VERSION = 1

_META_KEYS = ('num_classes', 'height', 'width', 'palette', 'rho', 'seed',
              'counts')
_LABEL_COLUMNS = ['index', 'split', 'class_label', 'bg_group']


def save_dataset(dataset, directory):
    """Write a dataset to a directory, creating it if needed.

    Args:
        dataset: Instance of generator.Dataset.
        directory: String path.
    """
    os.makedirs(directory, exist_ok=True)
    height, width, _ = dataset.image_shape
    meta = {
        'format': FORMAT_NAME,
        'version': FORMAT_VERSION,
        'num_classes': dataset.num_classes,
        'height': height,
        'width': width,
        'palette': list(dataset.palette.color_names),
        'rho': dataset.rho,
        'seed': dataset.seed,
        'counts': {'train': len(dataset.train), 'test': len(dataset.test)},
    }
    if dataset.spec is not None:
        meta['spec'] = dataset.spec.to_dict()
    if dataset.provenance is not None:
        meta['provenance'] = dataset.provenance
    with open(os.path.join(directory, 'meta.json'), 'w') as f:
        json.dump(logs.serialize(meta), f, indent=2, sort_keys=True)

    with open(os.path.join(directory, 'images.bin'), 'wb') as f:
        for split in dataset:
            pixels = np.round(np.clip(split.images, 0., 1.) * 255.)
            f.write(pixels.astype(np.uint8).tobytes(order='C'))

    rows = []
    for split in dataset:
        for i in range(len(split)):
            rows.append((i, split.name, int(split.class_labels[i]),
                         dataset.palette.name(int(split.bg_groups[i]))))
    labels = pd.DataFrame(rows, columns=_LABEL_COLUMNS)
    labels.to_csv(os.path.join(directory, 'labels.csv'), index=False)
    logging.info('Saved dataset ({} train, {} test) to {}.'.format(
        len(dataset.train), len(dataset.test), directory))


def _read_meta(directory):
    path = os.path.join(directory, 'meta.json')
    try:
        with open(path) as f:
            meta = json.load(f)
    except (OSError, ValueError) as e:
        raise errors.FormatError('corrupt header {}: {}'.format(path, e))
    if not isinstance(meta, dict) or meta.get('format') != FORMAT_NAME:
        raise errors.FormatError(
            'corrupt header {}: not a {} file'.format(path, FORMAT_NAME))
    missing = [k for k in _META_KEYS if k not in meta]
    if missing:
        raise errors.FormatError(
            'corrupt header {}: missing keys {}'.format(path, missing))
    counts = meta['counts']
    if not (isinstance(counts, dict) and
            all(isinstance(counts.get(s), int) and counts[s] >= 0
                for s in generator.SPLITS)):
        raise errors.FormatError(
            'corrupt header {}: bad counts {}'.format(path, counts))
    return meta


def load_dataset(directory):
    """Read a dataset written by save_dataset.

    Raises:
        errors.FormatError: Corrupt meta.json, images.bin of the wrong length,
            or labels.csv inconsistent with the header.
    """
    meta = _read_meta(directory)
    height, width = int(meta['height']), int(meta['width'])
    counts = meta['counts']
    try:
        palette = palettes.Palette(meta['palette'])
    except errors.InvalidArgumentError as e:
        raise errors.FormatError('corrupt header: {}'.format(e))
    total = counts['train'] + counts['test']
    expected_bytes = total * height * width * 3

    with open(os.path.join(directory, 'images.bin'), 'rb') as f:
        raw = f.read()
    if len(raw) != expected_bytes:
        raise errors.FormatError(
            'length mismatch: images.bin has {} bytes, expected {} '
            '({} images of {}x{}x3)'.format(
                len(raw), expected_bytes, total, height, width))
    pixels = np.frombuffer(raw, dtype=np.uint8).reshape(
        total, height, width, 3)
    images = pixels.astype(np.float32) / np.float32(255.)

    try:
        labels = pd.read_csv(os.path.join(directory, 'labels.csv'),
                             dtype={'split': str, 'bg_group': str},
                             keep_default_na=False)
    except (OSError, ValueError) as e:
        raise errors.FormatError('unreadable labels.csv: {}'.format(e))
    if list(labels.columns) != _LABEL_COLUMNS:
        raise errors.FormatError(
            'labels.csv columns {} != {}'.format(
                list(labels.columns), _LABEL_COLUMNS))

    splits = []
    offset = 0
    for name in generator.SPLITS:
        rows = labels[labels['split'] == name]
        if len(rows) != counts[name]:
            raise errors.FormatError(
                'length mismatch: labels.csv has {} {} rows, header says '
                '{}'.format(len(rows), name, counts[name]))
        if not np.array_equal(rows['index'].to_numpy(), np.arange(len(rows))):
            raise errors.FormatError(
                'labels.csv {} rows must be indexed 0..{} in order'.format(
                    name, len(rows) - 1))
        try:
            groups = [palette.index(g) for g in rows['bg_group']]
        except errors.InvalidArgumentError as e:
            raise errors.FormatError(str(e))
        splits.append(generator.LabeledSplit(
            name,
            images[offset:offset + counts[name]],
            rows['class_label'].to_numpy(),
            np.asarray(groups, dtype=np.int64),
        ))
        offset += counts[name]

    spec = None
    if 'spec' in meta:
        spec = generator.DatasetSpec.from_dict(meta['spec'])
    logging.info('Loaded dataset ({} train, {} test) from {}.'.format(
        counts['train'], counts['test'], directory))
    return generator.Dataset(
        splits[0], splits[1], num_classes=int(meta['num_classes']),
        palette=palette, rho=meta['rho'], seed=meta['seed'], spec=spec,
        provenance=meta.get('provenance'))
