""".. include:: README.md"""

from .batch import AugmentationSpec
from .batch import AugmentedBatch
from .batch import augment_batch
from .batch import augment_each
from .batch import augmented_dataset
from .batch import provenance
from .batch import write_provenance
from .perturbations import MixSpec
from .perturbations import PerturbSpec
from .perturbations import flip_mix_weight
from .perturbations import sample_trunc_gaussian
from .transforms import augment_gaussian
from .transforms import augment_mix
from .transforms import reconstruct
from .transforms import switch
