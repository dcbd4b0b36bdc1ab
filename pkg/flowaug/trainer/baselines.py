"""Pixel-space augmentation baselines: Mixup, Cutout and Cutmix.

Images are numpy arrays [H, W, C] or batches [N, H, W, C]; targets are soft
label arrays [..., num_classes] on the simplex. Mixed targets stay on the
simplex because they are convex combinations of simplex points.
"""

import numpy as np

from flowaug import errors


def mixup_batch(x1, y1, x2, y2, alpha, rng, lam=None):
    """Linear interpolation of two images and their targets.

    Args:
        x1, x2: Images or batches of the same shape.
        y1, y2: Soft targets, batched like the images.
        alpha: Positive float. lam ~ Beta(alpha, alpha).
        rng: numpy Generator.
        lam: Optional float overriding the Beta draw.

    Returns:
        x_new, y_new.
    """
    if lam is None:
        if not alpha > 0.:
            raise errors.InvalidArgumentError(
                'alpha must be positive, got {}'.format(alpha))
        lam = rng.beta(alpha, alpha)
    x_new = lam * np.asarray(x1) + (1. - lam) * np.asarray(x2)
    y_new = lam * np.asarray(y1) + (1. - lam) * np.asarray(y2)
    return x_new.astype(np.float32), y_new


def _clipped_box(center_row, center_col, box_h, box_w, height, width):
    """(top, bottom, left, right) of a box around a center, clipped."""
    top = int(np.clip(center_row - box_h // 2, 0, height))
    bottom = int(np.clip(center_row - box_h // 2 + box_h, 0, height))
    left = int(np.clip(center_col - box_w // 2, 0, width))
    right = int(np.clip(center_col - box_w // 2 + box_w, 0, width))
    return top, bottom, left, right


def cutout(x, size, fill, rng, center=None):
    """Set a size x size square, clipped at the borders, to fill.

    Args:
        x: Image [H, W, C] or batch [N, H, W, C]. Not modified.
        size: Non-negative int.
        fill: Float or per-channel sequence.
        rng: numpy Generator. Draws one center per image.
        center: Optional (row, col) used instead of a random center.

    Returns:
        Augmented copy of x. Labels are unchanged by contract.
    """
    if size < 0:
        raise errors.InvalidArgumentError(
            'cutout size must be non-negative, got {}'.format(size))
    x = np.array(x, dtype=np.float32, copy=True)
    if x.ndim == 4:
        for i in range(len(x)):
            x[i] = cutout(x[i], size, fill, rng, center=center)
        return x
    height, width = x.shape[:2]
    if center is None:
        center = (rng.integers(height), rng.integers(width))
    top, bottom, left, right = _clipped_box(
        center[0], center[1], size, size, height, width)
    x[top:bottom, left:right] = fill
    return x


def cutmix_box(lam, height, width, rng):
    """Random box whose area is about (1 - lam) of the image.

    Returns:
        (top, bottom, left, right), clipped to the image.
    """
    cut_ratio = np.sqrt(1. - lam)
    box_h = int(height * cut_ratio)
    box_w = int(width * cut_ratio)
    center = (rng.integers(height), rng.integers(width))
    return _clipped_box(center[0], center[1], box_h, box_w, height, width)


def cutmix_batch(x1, y1, x2, y2, alpha, rng, box=None):
    """Paste a rectangle of x2 into x1 and weight targets by area.

    Args:
        x1, x2: Images [H, W, C] or batches [N, H, W, C] of the same shape.
        y1, y2: Soft targets.
        alpha: Positive float. The box area is drawn via lam ~ Beta(alpha,
            alpha) as in cutmix_box.
        rng: numpy Generator.
        box: Optional (top, bottom, left, right) used instead of a random box.

    Returns:
        x_new, y_new with y_new = lam y1 + (1 - lam) y2 and lam = 1 - box area
        / image area, so the targets reflect the pasted area exactly.
    """
    x1 = np.asarray(x1, dtype=np.float32)
    x2 = np.asarray(x2, dtype=np.float32)
    if x1.shape != x2.shape:
        raise errors.InvalidArgumentError(
            'x1 and x2 must have the same shape, got {} and {}'.format(
                x1.shape, x2.shape))
    height, width = x1.shape[-3:-1]
    if box is None:
        if not alpha > 0.:
            raise errors.InvalidArgumentError(
                'alpha must be positive, got {}'.format(alpha))
        box = cutmix_box(rng.beta(alpha, alpha), height, width, rng)
    top, bottom, left, right = box
    x_new = x1.copy()
    x_new[..., top:bottom, left:right, :] = x2[..., top:bottom, left:right, :]
    area = max(bottom - top, 0) * max(right - left, 0)
    lam = 1. - area / float(height * width)
    y_new = lam * np.asarray(y1) + (1. - lam) * np.asarray(y2)
    return x_new, y_new
