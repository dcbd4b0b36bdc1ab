"""Dispersion of subgroup accuracies.

The weighted standard deviation of accuracies s_i with example counts w_i is

    sigma_w = sqrt(sum_i w_i (s_i - s_bar)^2 / (sum_i w_i - 1)),

where s_bar is the w-weighted mean. Counts are used as raw weights, so equal
weights reduce it to the sample standard deviation (ddof=1). The macro std is
the root-mean-square of per-class weighted stds and treats every class equally.
"""

import collections
import logging

import numpy as np

from flowaug import errors

WorstSubgroup = collections.namedtuple(
    'WorstSubgroup', ['class_name', 'group', 'accuracy', 'class_accuracy',
                      'gap'])


def weighted_std(s, w):
    """Count-weighted standard deviation of accuracies.

    Args:
        s: Sequence of accuracies.
        w: Sequence of positive weights, same length as s.

    Returns:
        Non-negative float.

    Raises:
        errors.InvalidArgumentError: Length mismatch or non-positive weight.
        errors.UndefinedVarianceError: sum(w) <= 1.
    """
    s = np.asarray(s, dtype=np.float64).ravel()
    w = np.asarray(w, dtype=np.float64).ravel()
    if s.shape != w.shape:
        raise errors.InvalidArgumentError(
            'accuracies and weights differ in length: {} and {}'.format(
                len(s), len(w)))
    if (w <= 0.).any():
        raise errors.InvalidArgumentError(
            'weights must be positive, got {}'.format(w.tolist()))
    total = w.sum()
    if total <= 1.:
        raise errors.UndefinedVarianceError(
            'weighted std needs total weight > 1, got {}'.format(total))
    mean = np.average(s, weights=w)
    variance = np.sum(w * (s - mean) ** 2) / (total - 1.)
    return float(np.sqrt(max(variance, 0.)))


def macro_std(per_class_sigma):
    """Root-mean-square of per-class weighted stds."""
    sigma = np.asarray(list(per_class_sigma), dtype=np.float64)
    if sigma.size == 0:
        raise errors.InvalidArgumentError('macro std of no classes')
    if (sigma < 0.).any():
        raise errors.InvalidArgumentError(
            'standard deviations must be non-negative, got {}'.format(
                sigma.tolist()))
    return float(np.sqrt(np.mean(sigma ** 2)))


def per_class_weighted_std(table):
    """Weighted std of each class over its populated groups.

    Args:
        table: Instance of subgroups.SubgroupAccuracyTable.

    Returns:
        Ordered dict from class name to sigma_w. Classes whose total count does
        not exceed one are left out with a warning.
    """
    acc = table.accuracies
    sigmas = collections.OrderedDict()
    for c, class_name in enumerate(table.class_names):
        cells = table.populated(c)
        try:
            sigmas[class_name] = weighted_std(acc[c, cells],
                                              table.counts[c, cells])
        except errors.UndefinedVarianceError:
            logging.warning(
                'Class {} has {} examples; its weighted std is undefined and '
                'it is left out of the macro std.'.format(
                    class_name, int(table.counts[c].sum())))
    return sigmas


def table_macro_std(table):
    return macro_std(per_class_weighted_std(table).values())


def overall_weighted_std(table):
    """Weighted std over every populated (class, group) cell at once."""
    mask = table.counts > 0
    return weighted_std(table.accuracies[mask], table.counts[mask])


def worst_subgroup(table):
    """Lowest-accuracy populated group of every class.

    Ties go to the group with the lowest index. Classes without any example are
    left out.

    Returns:
        List of WorstSubgroup, in class order.
    """
    acc = table.accuracies
    worst = []
    for c, class_name in enumerate(table.class_names):
        cells = table.populated(c)
        if cells.size == 0:
            continue
        g = int(cells[np.argmin(acc[c, cells])])
        class_accuracy = table.class_accuracy(c)
        worst.append(WorstSubgroup(
            class_name, table.group_names[g], float(acc[c, g]),
            class_accuracy, class_accuracy - float(acc[c, g])))
    return worst
