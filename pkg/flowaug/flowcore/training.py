"""Maximum-likelihood training of the decoupled flow.

The objective is the variational bound on log p(x) in bits/dim, with the KL
term of the global code weighted by a factor that warms up linearly from 0 to
1 over the first part of training. Logged bits/dim always use the full bound.

Example usage:
    ```python
    config = training.FlowTrainConfig(epochs=10, seed=0)
    model, history = training.train_flow(dataset, config)
    ```
"""

import dataclasses
import logging
import math

import numpy as np
import torch
from torch import nn
from torch import optim

from flowaug import determinism
from flowaug import errors
from flowaug import logs
from . import flow_model
from . import preprocessing

_LOG_DESCRIPTION = (
    'log.jsonl holds one JSON object per training epoch of the flow with keys '
    'epoch (1-based), train_bpd (mean bits/dim of the full variational bound '
    'over the epoch), kl_weight (KL weight at the end of the epoch), '
    'learning_rate, and eval_bpd (deterministic bits/dim on held-out images, '
    'null if none were given).'
)


@dataclasses.dataclass
class FlowTrainConfig:
    """Flow architecture and optimization settings."""
    epochs: int = 10
    batch_size: int = 64
    learning_rate: float = 1e-3
    lr_decay: float = 0.98
    grad_clip: float = 1.0
    kl_warmup_fraction: float = 0.1
    seed: int = 0
    num_threads: int = 1
    eval_batch_size: int = 256
    d_z: int = 64
    num_blocks: int = 8
    hidden_channels: int = 32
    cond_channels: int = 8
    encoder_channels: int = 32
    epsilon: float = preprocessing.DEFAULT_EPSILON

    def validate(self):
        if self.epochs < 1 or self.batch_size < 1 or self.eval_batch_size < 1:
            raise errors.ConfigError(
                'epochs and batch sizes must be positive, got epochs={}, '
                'batch_size={}, eval_batch_size={}'.format(
                    self.epochs, self.batch_size, self.eval_batch_size))
        if not self.learning_rate > 0.:
            raise errors.ConfigError(
                'learning_rate must be positive, got {}'.format(
                    self.learning_rate))
        if not 0. < self.lr_decay <= 1.:
            raise errors.ConfigError(
                'lr_decay must be in (0, 1], got {}'.format(self.lr_decay))
        if not 0. <= self.kl_warmup_fraction <= 1.:
            raise errors.ConfigError(
                'kl_warmup_fraction must be in [0, 1], got {}'.format(
                    self.kl_warmup_fraction))
        if self.grad_clip <= 0.:
            raise errors.ConfigError(
                'grad_clip must be positive, got {}'.format(self.grad_clip))
        if self.seed < 0:
            raise errors.ConfigError('seed must be non-negative')
        if self.d_z < 1 or self.num_blocks < 1:
            raise errors.ConfigError('d_z and num_blocks must be positive')
        if not 0. < self.epsilon < 0.5:
            raise errors.ConfigError('epsilon must be in (0, 0.5)')

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise errors.ConfigError(
                'unknown flow config keys {}'.format(sorted(unknown)))
        return cls(**d)

    def build_model(self, image_shape):
        return flow_model.FlowModel(
            image_shape=image_shape,
            d_z=self.d_z,
            num_blocks=self.num_blocks,
            hidden_channels=self.hidden_channels,
            cond_channels=self.cond_channels,
            encoder_channels=self.encoder_channels,
            epsilon=self.epsilon,
        )


def _images_of(data):
    """Images array of a Dataset (train split), LabeledSplit or array."""
    if hasattr(data, 'train'):
        data = data.train
    if hasattr(data, 'images'):
        data = data.images
    return np.asarray(data, dtype=np.float32)


def kl_weight(step, total_steps, warmup_fraction):
    """Linear KL warm-up: (step + 1) / warmup_steps, capped at 1."""
    warmup_steps = int(math.ceil(warmup_fraction * total_steps))
    if warmup_steps <= 0:
        return 1.
    return min(1., (step + 1) / warmup_steps)


def evaluate_bpd(model, images, batch_size=256, seed=None):
    """Mean bits/dim of the variational bound over a set of images.

    Args:
        model: Instance of flow_model.FlowModel.
        images: Array [N, H, W, 3], a LabeledSplit or a Dataset (train split).
        batch_size: Int. Evaluation chunk size; does not affect the result when
            seed is None.
        seed: Optional int. If given, dequantization noise and the global code
            are sampled; otherwise evaluation is deterministic.
    """
    images = _images_of(images)
    if len(images) == 0:
        raise errors.InvalidArgumentError('cannot evaluate on zero images')
    rng = None if seed is None else np.random.default_rng(seed)
    model.eval()
    values = [
        flow_model.nll_bpd(model, images[i:i + batch_size], rng=rng)
        for i in range(0, len(images), batch_size)
    ]
    return float(np.mean(np.concatenate(values)))


def train_flow(data, config, eval_data=None, log_dir=None, model=None):
    """Train a flow model by maximizing the variational bound.

    Args:
        data: Dataset (its train split is used), LabeledSplit or image array.
        config: Instance of FlowTrainConfig.
        eval_data: Optional held-out images evaluated after every epoch.
            Defaults to the test split when data is a Dataset.
        log_dir: Optional string. If given, per-epoch records are written there
            as JSON lines.
        model: Optional FlowModel to continue training. Built from the config
            otherwise.

    Returns:
        model: Trained FlowModel in eval mode.
        history: List of per-epoch dicts (see the log description).

    Raises:
        errors.ConfigError: Invalid config.
        errors.InvalidArgumentError: Empty data.
        errors.DivergenceError: Non-finite objective, with the epoch.
    """
    config.validate()
    if eval_data is None and hasattr(data, 'test'):
        eval_data = data.test
    images = _images_of(data)
    if len(images) == 0:
        raise errors.InvalidArgumentError('cannot train a flow on zero images')
    eval_images = None if eval_data is None else _images_of(eval_data)

    determinism.configure_torch(config.seed, config.num_threads)
    if model is None:
        model = config.build_model(tuple(images.shape[1:]))
    generator = determinism.torch_generator(config.seed)
    optimizer = optim.Adam(model.parameters(), lr=config.learning_rate)
    scheduler = optim.lr_scheduler.StepLR(
        optimizer, 1, gamma=config.lr_decay)
    logger = None
    if log_dir is not None:
        logger = logs.JsonLinesLogger(log_dir, _LOG_DESCRIPTION)

    data_tensor = torch.from_numpy(images).permute(0, 3, 1, 2)
    num_dims = model.num_dims
    steps_per_epoch = int(math.ceil(len(images) / config.batch_size))
    total_steps = steps_per_epoch * config.epochs
    history = []
    step = 0
    for epoch in range(1, config.epochs + 1):
        model.train()
        permutation = torch.randperm(len(images), generator=generator)
        bpd_sum = 0.
        for start in range(0, len(images), config.batch_size):
            x = data_tensor[permutation[start:start + config.batch_size]]
            noise = torch.rand(x.shape, generator=generator)
            eta = torch.randn((x.shape[0], model.d_z), generator=generator)
            beta = kl_weight(step, total_steps, config.kl_warmup_fraction)
            try:
                log_px_given_z, kl = model.log_likelihood_terms(x, noise, eta)
            except errors.NumericFailureError as e:
                raise errors.DivergenceError(epoch, float('nan')) from e
            loss = flow_model.bits_per_dim(
                log_px_given_z - beta * kl, num_dims).mean()
            if not bool(torch.isfinite(loss)):
                raise errors.DivergenceError(epoch, loss.item())
            optimizer.zero_grad()
            loss.backward()
            nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip)
            optimizer.step()
            with torch.no_grad():
                bpd_sum += flow_model.bits_per_dim(
                    log_px_given_z - kl, num_dims).sum().item()
            step += 1
        learning_rate = optimizer.param_groups[0]['lr']
        scheduler.step()

        train_bpd = bpd_sum / len(images)
        if not math.isfinite(train_bpd):
            raise errors.DivergenceError(epoch, train_bpd)
        eval_bpd = None
        if eval_images is not None and len(eval_images):
            eval_bpd = evaluate_bpd(model, eval_images,
                                    batch_size=config.eval_batch_size)
        record = {
            'epoch': epoch,
            'train_bpd': train_bpd,
            'kl_weight': beta,
            'learning_rate': learning_rate,
            'eval_bpd': eval_bpd,
        }
        history.append(record)
        if logger is not None:
            logger.log(record)
        logging.info('Flow epoch {}: train {:.4f} bpd, eval {} bpd.'.format(
            epoch, train_bpd,
            'n/a' if eval_bpd is None else '{:.4f}'.format(eval_bpd)))

    model.eval()
    model.train_config = config.to_dict()
    return model, history
