"""Classification losses with soft targets and the FlowAug objectives.

All objectives take a classifier f, a batch (x, y) of images [N, H, W, 3] and
soft targets [N, C], transform callables t(x, y, rng) -> (x', y') and a numpy
Generator, and return a scalar torch tensor that can be differentiated with
respect to the parameters of f.
"""

import numpy as np
import torch
import torch.nn.functional as F

from flowaug import errors


def one_hot(labels, num_classes):
    """Float array [N, num_classes] of one-hot rows."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise errors.InvalidArgumentError(
            'labels out of range [0, {})'.format(num_classes))
    out = np.zeros((len(labels), num_classes), dtype=np.float64)
    out[np.arange(len(labels)), labels] = 1.
    return out


def cross_entropy(logits, target):
    """Mean of -sum(target * log_softmax(logits)) over the batch.

    Args:
        logits: Tensor or array [C] or [N, C].
        target: Soft targets shaped like logits, rows summing to 1.

    Returns:
        Scalar tensor.
    """
    logits = torch.as_tensor(logits)
    if not logits.is_floating_point():
        logits = logits.to(torch.float64)
    target = torch.as_tensor(target).to(logits.dtype)
    if logits.dim() == 1:
        logits, target = logits.unsqueeze(0), target.unsqueeze(0)
    if logits.shape != target.shape:
        raise errors.InvalidArgumentError(
            'logits {} and targets {} differ in shape'.format(
                list(logits.shape), list(target.shape)))
    return -(target * F.log_softmax(logits, dim=1)).sum(dim=1).mean()


def erm_loss(f, batch):
    """Cross-entropy of f on the untransformed batch."""
    x, y = batch
    return cross_entropy(f(x), y)


def loss_flowaug(f, batch, t, rng):
    """Training on transformed images only: L(f(t(x)), y)."""
    x, y = batch
    x_t, y_t = t(x, y, rng)
    return cross_entropy(f(x_t), y_t)


def loss_flowaug_std(f, batch, t, lam, rng):
    """L(f(t(x)), y) + lam * L(f(x), y)."""
    if lam < 0.:
        raise errors.InvalidArgumentError(
            'lambda must be non-negative, got {}'.format(lam))
    loss = loss_flowaug(f, batch, t, rng)
    if lam:
        loss = loss + lam * erm_loss(f, batch)
    return loss


def loss_combine(f, batch, t1, t2, lambda1, lambda2, rng):
    """L(f(t1(x)), y) + lambda1 L(f(t2(x)), y) + lambda2 L(f(x), y)."""
    if lambda1 < 0. or lambda2 < 0.:
        raise errors.InvalidArgumentError(
            'lambdas must be non-negative, got {} and {}'.format(
                lambda1, lambda2))
    loss = loss_flowaug(f, batch, t1, rng)
    if lambda1:
        loss = loss + lambda1 * loss_flowaug(f, batch, t2, rng)
    if lambda2:
        loss = loss + lambda2 * erm_loss(f, batch)
    return loss
