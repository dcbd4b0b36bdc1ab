"""Classifier training under the standard, baseline and FlowAug objectives.

Training is SGD with momentum and step learning-rate decay. Each epoch the
objective is evaluated over batches of the training set:

* standard: L(f(x), y).
* mixup, cutout, cutmix: L(f(t(x)), t(y)) with the pixel baseline t.
* flowaug_gauss, flowaug_mix: L(f(t(x)), y) with t from T1 or T2. Raw images
  are never fed.
* flowaug_plus_std: L(f(t(x)), y) + lam L(f(x), y).
* combine: L(f(t1(x)), y) + lambda1 L(f(t2(x)), y) + lambda2 L(f(x), y).
* flowaug_gauss_cutmix: L(f(c(t1(x))), c(y)) with c Cutmix.

With precompute on, FlowAug methods draw K fresh transforms of every training
image at the start of each epoch and iterate over all N * K of them.

Example usage:
    ```python
    config = config_lib.TrainConfig(method='flowaug_gauss',
                                     flow_checkpoint='flow.ckpt', epochs=20)
    classifier, log = training.train(dataset, config, out_dir='runs/gauss')
    ```
"""

import copy
import dataclasses
import logging
import os
from typing import List, Optional

import numpy as np
import pandas as pd
import torch
from torch import optim

from flowaug import determinism
from flowaug import errors
from flowaug import logs
from flowaug.augment import batch as augment_batch
from flowaug.flowcore import checkpoint as flow_checkpoint
from . import classifier as classifier_lib
from . import config as config_lib
from . import losses
from . import train_transforms

PREDICTION_COLUMNS = ['index', 'true_class', 'pred_class']

_LOG_DESCRIPTION = (
    'log.jsonl holds one JSON object per training epoch with keys epoch '
    '(1-based), train_loss (mean objective over the epoch), first_step_loss '
    'and last_step_loss (objective of the first and last step of the epoch), '
    'learning_rate (rate used during the epoch) and test_accuracy (fraction '
    'of the test split classified correctly after the epoch, null without a '
    'test split).'
)


@dataclasses.dataclass
class TrainLog:
    """Per-epoch progress plus the last and best results.

    Fields:
        epochs: List of per-epoch records (see the log description).
        step_losses: Objective of every optimization step, in order.
        last_accuracy: Test accuracy after the final epoch.
        best_accuracy: Highest test accuracy over epochs.
        best_epoch: Epoch (1-based) of best_accuracy.
        last_checkpoint, best_checkpoint: Paths, if written.
    """
    epochs: List[dict] = dataclasses.field(default_factory=list)
    step_losses: List[float] = dataclasses.field(default_factory=list)
    last_accuracy: Optional[float] = None
    best_accuracy: Optional[float] = None
    best_epoch: Optional[int] = None
    last_checkpoint: Optional[str] = None
    best_checkpoint: Optional[str] = None

    def to_dict(self):
        return dataclasses.asdict(self)


def _split_arrays(split):
    return (np.asarray(split.images, dtype=np.float32),
            np.asarray(split.class_labels, dtype=np.int64))


def predict(classifier, split, batch_size=256):
    """Predicted classes of a split.

    Returns:
        DataFrame with columns index, true_class, pred_class; index is the
        position in the split.
    """
    images, labels = _split_arrays(split)
    classifier.eval()
    preds = []
    with torch.no_grad():
        for start in range(0, len(images), batch_size):
            logits = classifier(images[start:start + batch_size])
            preds.append(logits.argmax(dim=1).cpu().numpy())
    preds = (np.concatenate(preds) if preds
             else np.zeros(0, dtype=np.int64))
    return pd.DataFrame({
        'index': np.arange(len(images)),
        'true_class': labels,
        'pred_class': preds.astype(np.int64),
    }, columns=PREDICTION_COLUMNS)


def write_predictions(rows, path):
    """Write prediction rows as CSV index,true_class,pred_class."""
    frame = pd.DataFrame(rows, columns=PREDICTION_COLUMNS)
    frame.to_csv(path, index=False)
    logging.info('Wrote {} predictions to {}.'.format(len(frame), path))


def evaluate_accuracy(classifier, split, batch_size=256):
    """Fraction of the split classified correctly, or None if it is empty."""
    if len(split) == 0:
        return None
    rows = predict(classifier, split, batch_size=batch_size)
    return float((rows['true_class'] == rows['pred_class']).mean())


def _load_flow(config, flow):
    if not config.uses_flow:
        return None
    if flow is not None:
        return flow
    if not os.path.exists(config.flow_checkpoint):
        raise errors.ConfigError('flow checkpoint {} does not exist'.format(
            config.flow_checkpoint))
    return flow_checkpoint.load_flow(config.flow_checkpoint)


def _augmentation_spec(config, method):
    return augment_batch.AugmentationSpec(
        method=method, perturb=config.perturb, mix=config.mix, K=config.K,
        seed=config.seed)


def _flow_families(config):
    """Names of the FlowAug families needed, in (t1, t2) order."""
    if config.method in (config_lib.FLOWAUG_GAUSS,
                         config_lib.FLOWAUG_GAUSS_CUTMIX):
        return [augment_batch.GAUSSIAN]
    if config.method == config_lib.FLOWAUG_MIX:
        return [augment_batch.MIX]
    if config.method == config_lib.FLOWAUG_PLUS_STD:
        return [config.plus_std_family]
    if config.method == config_lib.COMBINE:
        return [augment_batch.GAUSSIAN, augment_batch.MIX]
    return []


class _Objective(object):
    """Per-batch loss of a configured method.

    With precompute, views holds per-family images of the (source, k) pairs of
    the current epoch and batches are index arrays into them.
    """

    def __init__(self, config, flow):
        self._config = config
        self._flow = flow
        self._families = _flow_families(config)
        self._views = None

    @property
    def precomputed(self):
        return bool(self._families) and self._config.precompute

    def start_epoch(self, train_split, epoch):
        if not self.precomputed:
            return
        self._views = []
        for view, family in enumerate(self._families):
            spec = _augmentation_spec(self._config, family)
            out = augment_batch.augment_each(
                self._flow, train_split, spec, epoch=epoch,
                num_workers=self._config.num_workers, view=view)
            self._views.append(out.images)

    def _flow_transform(self, family_index, positions):
        if self.precomputed:
            return train_transforms.FixedTransform(
                self._views[family_index][positions])
        family = self._families[family_index]
        if family == augment_batch.GAUSSIAN:
            return train_transforms.FlowGaussian(
                self._flow, self._config.perturb)
        return train_transforms.FlowMix(self._flow, self._config.mix)

    def loss(self, f, batch, positions, rng):
        c = self._config
        method = c.method
        if method == config_lib.STANDARD:
            return losses.erm_loss(f, batch)
        if method == config_lib.MIXUP:
            return losses.loss_flowaug(
                f, batch, train_transforms.Mixup(c.mixup_alpha), rng)
        if method == config_lib.CUTOUT:
            return losses.loss_flowaug(
                f, batch, train_transforms.Cutout(c.cutout_size, c.cutout_fill),
                rng)
        if method == config_lib.CUTMIX:
            return losses.loss_flowaug(
                f, batch, train_transforms.Cutmix(c.cutmix_alpha), rng)
        t1 = self._flow_transform(0, positions)
        if method in (config_lib.FLOWAUG_GAUSS, config_lib.FLOWAUG_MIX):
            return losses.loss_flowaug(f, batch, t1, rng)
        if method == config_lib.FLOWAUG_PLUS_STD:
            return losses.loss_flowaug_std(f, batch, t1, c.lam, rng)
        if method == config_lib.COMBINE:
            t2 = self._flow_transform(1, positions)
            return losses.loss_combine(
                f, batch, t1, t2, c.lambda1, c.lambda2, rng)
        if method == config_lib.FLOWAUG_GAUSS_CUTMIX:
            t = train_transforms.Compose(
                t1, train_transforms.Cutmix(c.cutmix_alpha))
            return losses.loss_flowaug(f, batch, t, rng)
        raise errors.ConfigError('unknown method {!r}'.format(method))


def train(data, config, out_dir=None, flow=None):
    """Train a classifier.

    Args:
        data: synthdata Dataset with train and test splits. The test split is
            evaluated after every epoch.
        config: Instance of config.TrainConfig.
        out_dir: Optional string. If given, the JSON-lines log and the last
            and best checkpoints ('last.ckpt', 'best.ckpt') are written there.
        flow: Optional FlowModel overriding config.flow_checkpoint.

    Returns:
        classifier: The classifier after the last epoch, in eval mode.
        log: Instance of TrainLog.

    Raises:
        errors.ConfigError: Invalid config or missing flow checkpoint, before
            any training.
        errors.DivergenceError: Non-finite objective.
    """
    config.validate(require_flow_checkpoint=flow is None)
    flow = _load_flow(config, flow)
    train_split, test_split = data.train, data.test
    images, labels = _split_arrays(train_split)
    if len(images) == 0:
        raise errors.InvalidArgumentError('cannot train on zero examples')
    targets = losses.one_hot(labels, data.num_classes)

    determinism.configure_torch(config.seed, config.num_threads)
    classifier = classifier_lib.ConvClassifier(
        data.num_classes, widths=config.widths)
    generator = determinism.torch_generator(config.seed)
    optimizer = optim.SGD(classifier.parameters(), lr=config.lr,
                          momentum=config.momentum,
                          weight_decay=config.weight_decay)
    scheduler = optim.lr_scheduler.MultiStepLR(
        optimizer, milestones=config.lr_decay_epochs,
        gamma=config.lr_decay_factor)
    objective = _Objective(config, flow)

    logger = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        logger = logs.JsonLinesLogger(out_dir, _LOG_DESCRIPTION)
    log = TrainLog()
    best_state = None
    step = 0
    logging.info('Training {} classifier ({} parameters) for {} epochs.'.format(
        config.method, classifier_lib.num_parameters(classifier),
        config.epochs))

    for epoch in range(1, config.epochs + 1):
        classifier.train()
        objective.start_epoch(train_split, epoch)
        # Positions index (source, k) pairs when transforms are precomputed
        repeats = config.K if objective.precomputed else 1
        permutation = torch.randperm(
            len(images) * repeats, generator=generator).numpy()
        epoch_losses = []
        for start in range(0, len(permutation), config.batch_size):
            positions = permutation[start:start + config.batch_size]
            sources = positions // repeats
            batch = (images[sources], targets[sources])
            rng = augment_batch.output_rng(config.seed, epoch, step)
            loss = objective.loss(classifier, batch, positions, rng)
            value = loss.item()
            if not np.isfinite(value):
                raise errors.DivergenceError(epoch, value)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_losses.append(value)
            step += 1
        learning_rate = optimizer.param_groups[0]['lr']
        scheduler.step()

        accuracy = evaluate_accuracy(classifier, test_split)
        record = {
            'epoch': epoch,
            'train_loss': float(np.mean(epoch_losses)),
            'first_step_loss': epoch_losses[0],
            'last_step_loss': epoch_losses[-1],
            'learning_rate': learning_rate,
            'test_accuracy': accuracy,
        }
        log.epochs.append(record)
        log.step_losses.extend(epoch_losses)
        if logger is not None:
            logger.log(record)
        log.last_accuracy = accuracy
        if accuracy is not None and (log.best_accuracy is None or
                                     accuracy > log.best_accuracy):
            log.best_accuracy = accuracy
            log.best_epoch = epoch
            best_state = copy.deepcopy(classifier.state_dict())
        logging.info('Epoch {}: loss {:.4f}, test accuracy {}.'.format(
            epoch, record['train_loss'],
            'n/a' if accuracy is None else '{:.4f}'.format(accuracy)))

    classifier.eval()
    if out_dir is not None:
        log.last_checkpoint = os.path.join(out_dir, 'last.ckpt')
        classifier_lib.save_classifier(
            classifier, log.last_checkpoint, train_config=config.to_dict(),
            extra={'epoch': config.epochs})
        if best_state is not None:
            best = classifier_lib.build_classifier(classifier.architecture)
            best.load_state_dict(best_state)
            log.best_checkpoint = os.path.join(out_dir, 'best.ckpt')
            classifier_lib.save_classifier(
                best, log.best_checkpoint, train_config=config.to_dict(),
                extra={'epoch': log.best_epoch})
    return classifier, log
