""".. include:: README.md"""

from .checkpoint import load_flow
from .checkpoint import save_flow
from .flow_model import FlowModel
from .flow_model import bits_per_dim
from .flow_model import decode
from .flow_model import encode
from .flow_model import kl_standard_normal
from .flow_model import nll_bpd
from .preprocessing import LogitPreprocessing
from .training import FlowTrainConfig
from .training import evaluate_bpd
from .training import train_flow
