""".. include:: README.md"""

from . import distributions
from . import shapes
from .annotations import AnnotationRow
from .annotations import AnnotationTable
from .annotations import annotations_from_split
from .annotations import annotations_from_split as annotations_from_dataset
from .annotations import load_annotations
from .annotations import save_annotations
from .dataset_io import load_dataset
from .dataset_io import save_dataset
from .generator import Dataset
from .generator import DatasetSpec
from .generator import LabeledExample
from .generator import LabeledSplit
from .generator import generate_dataset
from .generator import render_example
from .generator import render_mask
from .generator import sample_assignments
from .palettes import OTHERS
from .palettes import BackgroundGroup
from .palettes import Palette
from .renderer import ExampleRenderer
