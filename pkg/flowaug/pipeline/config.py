"""Experiment configuration.

An experiment config is a JSON object (or the dict returned by `get_config()`
of a Python config module) with the fields of ExperimentConfig:

    name            String label of the experiment.
    dataset         DatasetSpec fields of a synthetic dataset to generate.
    dataset_path    Existing dataset directory, used instead of `dataset`.
    annotations_path
                    Annotation CSV of the test split. Derived from the test
                    split's own labels if omitted.
    flow            FlowTrainConfig fields for training the flow.
    flow_checkpoint Existing flow checkpoint, used instead of training one.
    train           TrainConfig fields shared by every run.
    methods         List of runs. Each entry is a method name or a dict of
                    TrainConfig fields (method required) plus an optional
                    `name` distinguishing runs of the same method.
    seeds           Explicit list of seeds. Every method runs once per seed.
    exclude_others  Drop the "others" group from the metrics.
    grouping_path   Optional CSV `class,superclass` to pool classes.
    correlation     'pearson' or 'spearman'.
    figures         Whether to draw the report figures.
    num_workers     Threads for data generation and augmentation.
    out_dir         Output directory.

Values are resolved with the precedence
    dataclass defaults < config file < command-line flags.
"""

import collections
import dataclasses
import importlib
import importlib.util
import json
import os
from typing import List, Optional

from flowaug import errors
from flowaug.flowcore import training as flow_training
from flowaug.metrics import correlation as correlation_lib
from flowaug.synthdata import generator
from flowaug.trainer import config as train_config_lib

RunSpec = collections.namedtuple('RunSpec', ['name', 'seed', 'config'])


@dataclasses.dataclass
class ExperimentConfig:
    name: str = 'experiment'
    dataset: Optional[dict] = None
    dataset_path: Optional[str] = None
    annotations_path: Optional[str] = None
    flow: dict = dataclasses.field(default_factory=dict)
    flow_checkpoint: Optional[str] = None
    train: dict = dataclasses.field(default_factory=dict)
    methods: List = dataclasses.field(
        default_factory=lambda: [train_config_lib.STANDARD])
    seeds: List[int] = dataclasses.field(default_factory=lambda: [0])
    exclude_others: bool = False
    grouping_path: Optional[str] = None
    correlation: str = correlation_lib.PEARSON
    figures: bool = True
    num_workers: int = 1
    out_dir: str = os.path.join('runs', 'experiment')

    def dataset_spec(self):
        return generator.DatasetSpec.from_dict(self.dataset or {})

    def flow_config(self):
        return flow_training.FlowTrainConfig.from_dict(self.flow)

    def runs(self):
        """RunSpec of every (method entry, seed) pair, methods outermost."""
        runs = []
        for entry in self.methods:
            if isinstance(entry, str):
                entry = {'method': entry}
            entry = dict(entry)
            name = entry.pop('name', None) or entry.get('method')
            for seed in self.seeds:
                fields = dict(self.train)
                fields.update(entry)
                fields['seed'] = int(seed)
                runs.append(RunSpec(
                    name, int(seed),
                    train_config_lib.TrainConfig.from_dict(fields)))
        return runs

    def run_names(self):
        """Distinct run names, in config order."""
        names = [r.name for r in self.runs()]
        return list(collections.OrderedDict.fromkeys(names))

    @property
    def needs_flow(self):
        return any(r.config.uses_flow for r in self.runs())

    def validate(self):
        """Raise errors.ConfigError on the first problem found."""
        if (self.dataset is None) == (self.dataset_path is None):
            raise errors.ConfigError(
                'exactly one of dataset and dataset_path must be given')
        for key in ('dataset_path', 'annotations_path', 'flow_checkpoint',
                    'grouping_path'):
            path = getattr(self, key)
            if path is not None and not os.path.exists(path):
                raise errors.ConfigError('{} {} does not exist'.format(
                    key, path))
        if not self.seeds:
            raise errors.ConfigError('seeds must list at least one seed')
        if any(int(s) != s or s < 0 for s in self.seeds):
            raise errors.ConfigError(
                'seeds must be non-negative ints, got {}'.format(self.seeds))
        if len(set(self.seeds)) != len(self.seeds):
            raise errors.ConfigError(
                'seeds must be distinct, got {}'.format(self.seeds))
        if not self.methods:
            raise errors.ConfigError('methods must list at least one method')
        if self.correlation not in correlation_lib.KINDS:
            raise errors.ConfigError('correlation must be one of {}'.format(
                correlation_lib.KINDS))
        if self.num_workers < 1:
            raise errors.ConfigError('num_workers must be positive')
        try:
            if self.dataset is not None:
                self.dataset_spec().validate()
            runs = self.runs()
        except (errors.InvalidArgumentError, TypeError) as e:
            raise errors.ConfigError(str(e))
        names = [r.name for r in runs[::len(self.seeds)]]
        if len(set(names)) != len(names):
            raise errors.ConfigError(
                'run names must be unique, got {}; add a name to repeated '
                'methods'.format(names))
        for run in runs:
            run.config.validate(require_flow_checkpoint=False)
        if self.needs_flow and self.flow_checkpoint is None:
            self.flow_config().validate()

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise errors.ConfigError(
                'unknown experiment config keys {}'.format(sorted(unknown)))
        try:
            return cls(**d)
        except TypeError as e:
            raise errors.ConfigError(str(e))


def _load_module_config(name_or_path, **kwargs):
    if name_or_path.endswith('.py'):
        module_name = os.path.splitext(os.path.basename(name_or_path))[0]
        spec = importlib.util.spec_from_file_location(module_name,
                                                      name_or_path)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
    else:
        module = importlib.import_module(name_or_path)
    if not hasattr(module, 'get_config'):
        raise errors.ConfigError(
            'config module {} has no get_config()'.format(name_or_path))
    return module.get_config(**kwargs)


def load_config_dict(source, **kwargs):
    """Raw config dict from a JSON file, a .py file or a module name.

    Args:
        source: Path of a .json or .py file, or a dotted module name such as
            'flowaug_demos.example_configs.subgroup_discrepancy'.
        **kwargs: Passed to get_config() of a Python config.

    Raises:
        errors.ConfigError: Unreadable source.
    """
    if source.endswith('.json'):
        try:
            with open(source) as f:
                d = json.load(f)
        except (OSError, ValueError) as e:
            raise errors.ConfigError('cannot read config {}: {}'.format(
                source, e))
    else:
        try:
            d = _load_module_config(source, **kwargs)
        except ImportError as e:
            raise errors.ConfigError('cannot import config {}: {}'.format(
                source, e))
    if not isinstance(d, dict):
        raise errors.ConfigError(
            'config {} is not a JSON object'.format(source))
    return d


def load_config(source=None, overrides=None, **kwargs):
    """ExperimentConfig from defaults, a config source and overrides.

    Args:
        source: Optional config source, see load_config_dict.
        overrides: Optional dict of values taking precedence over the file,
            typically the command-line flags the user set explicitly.
        **kwargs: Passed to get_config() of a Python config.

    Returns:
        Instance of ExperimentConfig. Not yet validated.
    """
    d = {} if source is None else load_config_dict(source, **kwargs)
    d.update(overrides or {})
    return ExperimentConfig.from_dict(d)
