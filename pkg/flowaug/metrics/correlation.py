"""Sample correlation between paired run statistics."""

import numpy as np
from scipy import stats

from flowaug import errors

PEARSON = 'pearson'
SPEARMAN = 'spearman'
KINDS = (PEARSON, SPEARMAN)

MIN_POINTS = 3


def correlation(xs, ys, kind=PEARSON):
    """Pearson or Spearman correlation coefficient.

    Args:
        xs: Sequence of finite floats.
        ys: Sequence of finite floats, paired with xs.
        kind: 'pearson' or 'spearman'.

    Returns:
        Float in [-1, 1].

    Raises:
        errors.InvalidArgumentError: Unknown kind, length mismatch or
            non-finite value.
        errors.UndefinedCorrelationError: Fewer than 3 pairs, or either
            sequence constant.
    """
    if kind not in KINDS:
        raise errors.InvalidArgumentError(
            'kind must be one of {}, got {!r}'.format(KINDS, kind))
    xs = np.asarray(xs, dtype=np.float64).ravel()
    ys = np.asarray(ys, dtype=np.float64).ravel()
    if xs.shape != ys.shape:
        raise errors.InvalidArgumentError(
            'xs and ys differ in length: {} and {}'.format(len(xs), len(ys)))
    if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
        raise errors.InvalidArgumentError('correlation of non-finite values')
    if len(xs) < MIN_POINTS:
        raise errors.UndefinedCorrelationError(
            'correlation needs at least {} pairs, got {}'.format(
                MIN_POINTS, len(xs)))
    if np.ptp(xs) == 0. or np.ptp(ys) == 0.:
        raise errors.UndefinedCorrelationError(
            'correlation of a constant sequence')
    if kind == PEARSON:
        r = stats.pearsonr(xs, ys)[0]
    else:
        r = stats.spearmanr(xs, ys)[0]
    return float(np.clip(r, -1., 1.))
