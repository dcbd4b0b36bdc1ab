""".. include:: README.md"""

from .config import ExperimentConfig
from .config import RunSpec
from .config import load_config
from .config import load_config_dict
from .experiment import evaluate_predictions
from .experiment import run_experiment
from .experiment import summarize_experiment
from .figures import emit_augmentation_grid
from .figures import emit_figures
from .manifest import ExperimentManifest
from .manifest import file_digest
from .manifest import path_digest
