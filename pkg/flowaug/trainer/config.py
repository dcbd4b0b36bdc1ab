"""Classifier training configuration.

The JSON form of a TrainConfig is the dict of its fields; nested perturb and
mix entries are the dicts of augment.PerturbSpec and augment.MixSpec. Fields
left out take the defaults below.
"""

import dataclasses
from typing import Optional, Sequence

from flowaug import errors
from flowaug.augment import perturbations

STANDARD = 'standard'
MIXUP = 'mixup'
CUTOUT = 'cutout'
CUTMIX = 'cutmix'
FLOWAUG_GAUSS = 'flowaug_gauss'
FLOWAUG_MIX = 'flowaug_mix'
FLOWAUG_PLUS_STD = 'flowaug_plus_std'
COMBINE = 'combine'
FLOWAUG_GAUSS_CUTMIX = 'flowaug_gauss_cutmix'

METHODS = (STANDARD, MIXUP, CUTOUT, CUTMIX, FLOWAUG_GAUSS, FLOWAUG_MIX,
           FLOWAUG_PLUS_STD, COMBINE, FLOWAUG_GAUSS_CUTMIX)
FLOW_METHODS = (FLOWAUG_GAUSS, FLOWAUG_MIX, FLOWAUG_PLUS_STD, COMBINE,
                FLOWAUG_GAUSS_CUTMIX)

# Values of lambda2 tuned for the combined objective
LAMBDA2_GRID = (0.01, 0.05, 0.1)


@dataclasses.dataclass
class TrainConfig:
    """Everything that determines a classifier training run.

    Fields:
        method: One of METHODS.
        epochs: Number of epochs.
        batch_size: Examples per step.
        lr: Initial learning rate. Defaults to 0.1 * batch_size / 128.
        lr_decay_epochs: Increasing epochs after which the learning rate is
            multiplied by lr_decay_factor. Defaults to 50% and 75% of epochs.
        lr_decay_factor: Multiplicative decay.
        momentum: SGD momentum.
        weight_decay: L2 penalty.
        seed: Non-negative int.
        flow_checkpoint: Path of the flow, required by FlowAug methods.
        perturb: PerturbSpec of transform family T1.
        mix: MixSpec of transform family T2.
        K: FlowAug transforms per image per epoch.
        lam: Weight of the untransformed loss for flowaug_plus_std.
        plus_std_family: 'gaussian' (T1) or 'mix' (T2) for flowaug_plus_std.
        lambda1: Weight of the T2 loss for combine.
        lambda2: Weight of the untransformed loss for combine.
        mixup_alpha, cutmix_alpha: Beta concentrations of the baselines.
        cutout_size, cutout_fill: Square side and fill value of Cutout.
        precompute: If True, FlowAug transforms are computed once per epoch
            for the whole training set; otherwise per step.
        widths: Channel widths of the classifier's four blocks.
        num_threads: Torch intra-op threads.
        num_workers: Threads used for FlowAug precomputation.
    """
    method: str = STANDARD
    epochs: int = 30
    batch_size: int = 128
    lr: Optional[float] = None
    lr_decay_epochs: Optional[Sequence[int]] = None
    lr_decay_factor: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 5e-4
    seed: int = 0
    flow_checkpoint: Optional[str] = None
    perturb: perturbations.PerturbSpec = dataclasses.field(
        default_factory=perturbations.PerturbSpec)
    mix: perturbations.MixSpec = dataclasses.field(
        default_factory=perturbations.MixSpec)
    K: int = 1
    lam: float = 1.
    plus_std_family: str = 'gaussian'
    lambda1: float = 1.
    lambda2: float = 0.05
    mixup_alpha: float = 1.
    cutmix_alpha: float = 1.
    cutout_size: int = 16
    cutout_fill: float = 0.
    precompute: bool = True
    widths: Sequence[int] = (16, 32, 64, 128)
    num_threads: int = 1
    num_workers: int = 1

    def __post_init__(self):
        if isinstance(self.perturb, dict):
            self.perturb = perturbations.PerturbSpec(**self.perturb)
        if isinstance(self.mix, dict):
            self.mix = perturbations.MixSpec(**self.mix)
        if self.lr is None:
            self.lr = 0.1 * self.batch_size / 128.
        if self.lr_decay_epochs is None:
            self.lr_decay_epochs = sorted(
                {max(1, int(round(f * self.epochs))) for f in (0.5, 0.75)})
        self.lr_decay_epochs = [int(e) for e in self.lr_decay_epochs]
        self.widths = tuple(int(w) for w in self.widths)

    @property
    def uses_flow(self):
        return self.method in FLOW_METHODS

    def validate(self, require_flow_checkpoint=True):
        """Raise errors.ConfigError on the first inconsistency found.

        Args:
            require_flow_checkpoint: Bool. Whether FlowAug methods must name a
                flow checkpoint. Off when the caller supplies the flow itself.
        """
        if self.method not in METHODS:
            raise errors.ConfigError('method must be one of {}, got {!r}'
                                     .format(METHODS, self.method))
        if self.epochs < 1 or self.batch_size < 1:
            raise errors.ConfigError(
                'epochs and batch_size must be positive, got {} and {}'.format(
                    self.epochs, self.batch_size))
        if not self.lr > 0.:
            raise errors.ConfigError('lr must be positive, got {}'.format(
                self.lr))
        decay = self.lr_decay_epochs
        if any(b <= a for a, b in zip(decay, decay[1:])):
            raise errors.ConfigError(
                'lr_decay_epochs must be increasing, got {}'.format(decay))
        if decay and decay[0] < 1:
            raise errors.ConfigError('lr_decay_epochs must be >= 1')
        if not 0. < self.lr_decay_factor <= 1.:
            raise errors.ConfigError('lr_decay_factor must be in (0, 1]')
        if self.momentum < 0. or self.weight_decay < 0.:
            raise errors.ConfigError(
                'momentum and weight_decay must be non-negative')
        if self.seed < 0:
            raise errors.ConfigError('seed must be non-negative')
        for name in ('lam', 'lambda1', 'lambda2'):
            if getattr(self, name) < 0.:
                raise errors.ConfigError('{} must be non-negative, got {}'
                                         .format(name, getattr(self, name)))
        if self.K < 1:
            raise errors.ConfigError('K must be at least 1, got {}'.format(
                self.K))
        if self.plus_std_family not in ('gaussian', 'mix'):
            raise errors.ConfigError(
                'plus_std_family must be gaussian or mix, got {!r}'.format(
                    self.plus_std_family))
        if self.mixup_alpha <= 0. or self.cutmix_alpha <= 0.:
            raise errors.ConfigError('Beta concentrations must be positive')
        if self.cutout_size < 0:
            raise errors.ConfigError('cutout_size must be non-negative')
        if len(self.widths) != 4 or min(self.widths) < 1:
            raise errors.ConfigError(
                'widths must be four positive ints, got {}'.format(self.widths))
        if (require_flow_checkpoint and self.uses_flow and
                not self.flow_checkpoint):
            raise errors.ConfigError(
                'method {} needs flow_checkpoint'.format(self.method))
        try:
            self.perturb.validate()
            self.mix.validate()
        except errors.InvalidArgumentError as e:
            raise errors.ConfigError(str(e))

    def to_dict(self):
        d = dataclasses.asdict(self)
        d['widths'] = list(d['widths'])
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise errors.ConfigError(
                'unknown train config keys {}'.format(sorted(unknown)))
        try:
            return cls(**d)
        except TypeError as e:
            raise errors.ConfigError(str(e))
