"""Report figures.

For every method, a grouped bar chart shows each class's accuracy (dark bar)
next to its worst-subgroup accuracy (light bar), with the total accuracy as a
horizontal reference line. A second chart compares the macro std of all
methods in config order. Figures are drawn with the Agg backend and written
without a timestamp, so identical reports give identical files.
"""

import collections
import logging
import os

import imageio
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from flowaug.augment import perturbations
from flowaug.augment import transforms

_DARK = '#1f4e79'
_LIGHT = '#9dc3e6'
_PNG_METADATA = {'Software': None}


def _as_list(reports):
    return list(reports) if isinstance(reports, (list, tuple)) else [reports]


def _class_bars(reports):
    """Mean class and worst-subgroup accuracies over a method's reports."""
    reports = _as_list(reports)
    classes = [w['class'] for w in reports[0].worst_subgroup]
    class_acc = collections.defaultdict(list)
    worst_acc = collections.defaultdict(list)
    for report in reports:
        for w in report.worst_subgroup:
            class_acc[w['class']].append(w['class_accuracy'])
            worst_acc[w['class']].append(w['accuracy'])
    total = float(np.mean([r.total_accuracy for r in reports]))
    return (classes, [float(np.mean(class_acc[c])) for c in classes],
            [float(np.mean(worst_acc[c])) for c in classes], total)


def _save(fig, path):
    fig.savefig(path, dpi=100, metadata=_PNG_METADATA)
    plt.close(fig)


def plot_subgroups(name, reports, path):
    """Grouped bars of class and worst-subgroup accuracy for one method."""
    classes, class_acc, worst_acc, total = _class_bars(reports)
    x = np.arange(len(classes))
    width = 0.38
    fig, ax = plt.subplots(figsize=(max(4., 0.9 * len(classes) + 2.), 3.5))
    ax.bar(x - width / 2, class_acc, width, color=_DARK, label='class')
    ax.bar(x + width / 2, worst_acc, width, color=_LIGHT,
           label='worst subgroup')
    ax.axhline(total, color='black', linestyle='--', linewidth=1.,
               label='total')
    ax.set_xticks(x)
    ax.set_xticklabels(classes)
    ax.set_ylim(0., 1.05)
    ax.set_ylabel('accuracy')
    ax.set_title(name)
    ax.legend(loc='lower right', fontsize='small')
    fig.tight_layout()
    _save(fig, path)


def plot_macro_std(names, values, path):
    """Bar chart of macro std per method, in the given order."""
    fig, ax = plt.subplots(figsize=(max(4., 0.9 * len(names) + 2.), 3.5))
    ax.bar(np.arange(len(names)), values, color=_DARK)
    ax.set_xticks(np.arange(len(names)))
    ax.set_xticklabels(names, rotation=30, ha='right')
    ax.set_ylabel('macro std')
    fig.tight_layout()
    _save(fig, path)


def emit_figures(reports, out_dir):
    """Draw the report figures.

    Args:
        reports: Ordered mapping from method name to a DiscrepancyReport or a
            list of them (one per seed, averaged). Mapping order is the order
            of the macro std chart.
        out_dir: String directory, created if needed.

    Returns:
        List of written file paths. Empty, with a warning, if there are no
        reports.
    """
    reports = collections.OrderedDict(
        (k, _as_list(v)) for k, v in reports.items() if _as_list(v))
    if not reports:
        logging.warning('No reports given; no figures drawn.')
        return []
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, method_reports in reports.items():
        path = os.path.join(out_dir, 'subgroups_{}.png'.format(name))
        plot_subgroups(name, method_reports, path)
        paths.append(path)
    path = os.path.join(out_dir, 'macro_std.png')
    plot_macro_std(
        list(reports.keys()),
        [float(np.mean([r.macro_std for r in v])) for v in reports.values()],
        path)
    paths.append(path)
    logging.info('Wrote {} figures to {}.'.format(len(paths), out_dir))
    return paths


def _to_uint8(images):
    return np.round(np.clip(images, 0., 1.) * 255.).astype(np.uint8)


def augmentation_rows(model, images, perturb=None, mix=None, seed=0):
    """Rows of the qualitative grid, each a float array like images.

    The rows are the originals, their reconstructions, a T1 transform, a T2
    transform with the next image as partner, and the switch of each image's
    local code with the next image's global code.
    """
    perturb = perturb or perturbations.PerturbSpec()
    mix = mix or perturbations.MixSpec()
    images = np.asarray(images, dtype=np.float32)
    partners = np.roll(images, -1, axis=0)
    rng = np.random.default_rng(seed)
    return [
        images,
        transforms.reconstruct(model, images),
        transforms.augment_gaussian(model, images, perturb, rng),
        transforms.augment_mix(model, images, partners, mix, rng),
        transforms.switch(model, images, partners),
    ]


def emit_augmentation_grid(model, images, path, perturb=None, mix=None,
                           seed=0, padding=2):
    """Write the qualitative augmentation grid as an image file.

    Args:
        model: Trained FlowModel.
        images: Float array [N, H, W, 3], N >= 2.
        path: Output file, format chosen by imageio from the extension.
        perturb, mix: Optional PerturbSpec and MixSpec.
        seed: Int seed of the transforms.
        padding: Int pixels of white between tiles.

    Returns:
        The uint8 grid array that was written.
    """
    rows = augmentation_rows(model, images, perturb, mix, seed)
    n, h, w, _ = rows[0].shape
    grid = np.full((len(rows) * (h + padding) + padding,
                    n * (w + padding) + padding, 3), 255, dtype=np.uint8)
    for r, row in enumerate(rows):
        tiles = _to_uint8(row)
        for i in range(n):
            top = padding + r * (h + padding)
            left = padding + i * (w + padding)
            grid[top:top + h, left:left + w] = tiles[i]
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    imageio.imwrite(path, grid)
    logging.info('Wrote augmentation grid to {}.'.format(path))
    return grid
