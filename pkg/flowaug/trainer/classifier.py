"""Convolutional classifiers mapping images [N, H, W, 3] to class logits."""

import numpy as np
import torch
from torch import nn

from flowaug import checkpoints
from flowaug import errors

KIND = 'classifier'


class _ImageClassifier(nn.Module):
    """Shared input handling: NHWC arrays or tensors in [0, 1]."""

    @property
    def dtype(self):
        return next(self.parameters()).dtype

    def forward(self, x):
        x = torch.as_tensor(np.asarray(x) if not torch.is_tensor(x) else x)
        x = x.to(self.dtype).permute(0, 3, 1, 2)
        return self.logits(2. * x - 1.)

    def logits(self, x):
        raise NotImplementedError


class ConvClassifier(_ImageClassifier):
    """Four conv-batchnorm-relu blocks, pooling between them, linear head."""

    def __init__(self, num_classes, widths=(16, 32, 64, 128)):
        super(ConvClassifier, self).__init__()
        if num_classes < 2:
            raise errors.InvalidArgumentError(
                'need at least 2 classes, got {}'.format(num_classes))
        self.num_classes = int(num_classes)
        self.widths = tuple(int(w) for w in widths)
        layers = []
        in_channels = 3
        for i, w in enumerate(self.widths):
            layers += [
                nn.Conv2d(in_channels, w, 3, padding=1, bias=False),
                nn.BatchNorm2d(w),
                nn.ReLU(),
            ]
            if i < len(self.widths) - 1:
                layers.append(nn.MaxPool2d(2))
            in_channels = w
        self.features = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.head = nn.Linear(in_channels, self.num_classes)

    @property
    def architecture(self):
        return {'type': 'conv', 'num_classes': self.num_classes,
                'widths': list(self.widths)}

    def logits(self, x):
        return self.head(self.pool(self.features(x)).flatten(1))


class TinyClassifier(_ImageClassifier):
    """A few hundred parameters, small enough for finite-difference checks."""

    def __init__(self, num_classes, channels=4):
        super(TinyClassifier, self).__init__()
        self.num_classes = int(num_classes)
        self.channels = int(channels)
        self.conv = nn.Conv2d(3, channels, 3, padding=1)
        self.head = nn.Linear(channels, num_classes)

    @property
    def architecture(self):
        return {'type': 'tiny', 'num_classes': self.num_classes,
                'channels': self.channels}

    def logits(self, x):
        return self.head(torch.tanh(self.conv(x)).mean(dim=(2, 3)))


def build_classifier(architecture):
    architecture = dict(architecture)
    kind = architecture.pop('type')
    if kind == 'conv':
        return ConvClassifier(**architecture)
    elif kind == 'tiny':
        return TinyClassifier(**architecture)
    raise errors.FormatError('unknown classifier type {!r}'.format(kind))


def num_parameters(model):
    return sum(p.numel() for p in model.parameters())


def save_classifier(model, path, train_config=None, extra=None):
    header = {'architecture': model.architecture, 'config': train_config}
    if extra:
        header.update(extra)
    checkpoints.save_checkpoint(path, KIND, header, model.state_dict())


def load_classifier(path):
    def build(header):
        try:
            return build_classifier(header['architecture'])
        except (KeyError, TypeError) as e:
            raise errors.FormatError(
                'invalid classifier descriptor: {}'.format(e))
    model, header = checkpoints.load_checkpoint(path, KIND, build)
    return model
