""".. include:: README.md"""

from . import baselines
from . import train_transforms
from .classifier import ConvClassifier
from .classifier import TinyClassifier
from .classifier import load_classifier
from .classifier import save_classifier
from .config import TrainConfig
from .losses import cross_entropy
from .losses import loss_combine
from .losses import loss_flowaug
from .losses import loss_flowaug_std
from .losses import one_hot
from .training import TrainLog
from .training import evaluate_accuracy
from .training import predict
from .training import train
from .training import write_predictions
