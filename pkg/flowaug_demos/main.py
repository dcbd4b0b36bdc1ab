"""Command-line interface.

Run with the following:
$ flowaug <subcommand> [--flags]
or, from a source checkout,
$ python3 -m flowaug_demos.main <subcommand> [--flags]

Subcommands:
    generate-data   --config <DatasetSpec> --out <dataset dir>
    train-flow      --config <FlowTrainConfig> --data <dataset dir> --out <dir>
    augment         --flow <checkpoint> --in <dataset dir> --out <dataset dir>
                    [--method gaussian|mix] [--target z|nu]
                    [--dist trunc-gaussian|uniform] [--sigma] [--bound]
                    [--alpha] [--tr] [--count L]
    train           --config <TrainConfig> --data <dataset dir> --out <dir>
                    [--flow <checkpoint>]
    predict         --checkpoint <classifier> --data <dataset dir>
                    --out <predictions csv>
    evaluate        --predictions <csv> (--annotations <csv> | --data <dir>)
                    [--grouping <csv>] [--exclude_others] --out <dir>
    report          --config <ExperimentConfig> --out <experiment dir>
    run             --config <ExperimentConfig> [--out <experiment dir>]

--config accepts a JSON file, a Python file or a dotted module name exposing
get_config(level), for instance
flowaug_demos.example_configs.flowaug_mitigation.
--seed overrides the seed of the subcommand's config; for `run` it replaces
the list of seeds. Flags left unset do not override the config.

Exit code 0 on success, 1 on a validation error, 2 on a failed stage.
"""

import logging
import os
import sys

from absl import app
from absl import flags

from flowaug import errors
from flowaug.augment import batch as augment_batch
from flowaug.augment import perturbations
from flowaug.flowcore import checkpoint as flow_checkpoint
from flowaug.flowcore import training as flow_training
from flowaug.pipeline import config as config_lib
from flowaug.pipeline import experiment
from flowaug.pipeline import figures
from flowaug.synthdata import annotations as annotations_lib
from flowaug.synthdata import dataset_io
from flowaug.synthdata import generator
from flowaug.trainer import classifier as classifier_lib
from flowaug.trainer import config as train_config_lib
from flowaug.trainer import training as trainer

FLAGS = flags.FLAGS

# Global flags
flags.DEFINE_string('config', None, 'Config of the subcommand.')
flags.DEFINE_string('out', None, 'Output file or directory.')
flags.DEFINE_integer('seed', None, 'Seed overriding the config.')
flags.DEFINE_integer('level', 0, 'Level passed to get_config() of Python '
                     'configs.')
flags.DEFINE_integer('num_workers', None, 'Worker threads.')

# Inputs
flags.DEFINE_string('data', None, 'Dataset directory.')
flags.DEFINE_string('in', None, 'Input dataset directory of augment.')
flags.DEFINE_string('flow', None, 'Flow checkpoint.')
flags.DEFINE_string('checkpoint', None, 'Classifier checkpoint.')
flags.DEFINE_string('predictions', None, 'Predictions CSV.')
flags.DEFINE_string('annotations', None, 'Annotation CSV.')
flags.DEFINE_string('grouping', None, 'CSV class,superclass pooling classes.')

# Overrides
flags.DEFINE_float('rho', None, 'Spurious-correlation strength.')
flags.DEFINE_integer('num_classes', None, 'Number of classes.')
flags.DEFINE_integer('n_train', None, 'Number of training examples.')
flags.DEFINE_integer('n_test', None, 'Number of test examples.')
flags.DEFINE_integer('epochs', None, 'Training epochs.')
flags.DEFINE_enum('train_method', None, train_config_lib.METHODS,
                  'Classifier training method.')
flags.DEFINE_boolean('exclude_others', None,
                     'Drop the "others" group from the metrics.')
flags.DEFINE_boolean('force', False, 'Re-run up-to-date stages.')

# Augmentation
flags.DEFINE_enum('method', augment_batch.GAUSSIAN, augment_batch.METHODS,
                  'Transform family: gaussian (T1) or mix (T2).')
flags.DEFINE_enum('target', 'z', ['z', 'nu'], 'Code to transform.')
flags.DEFINE_enum('dist', 'trunc-gaussian', ['trunc-gaussian', 'uniform'],
                  'Perturbation distribution of T1.')
flags.DEFINE_float('mu', 0., 'Mean of the truncated Gaussian.')
flags.DEFINE_float('sigma', 0.1, 'Standard deviation of the truncated '
                   'Gaussian.')
flags.DEFINE_float('bound', 4., 'Truncation bound of the Gaussian.')
flags.DEFINE_float('low', -0.2, 'Lower end of the uniform perturbation.')
flags.DEFINE_float('high', 0.2, 'Upper end of the uniform perturbation.')
flags.DEFINE_boolean('clamp_to_bound', False,
                     'Also clamp the perturbed code to [-bound, bound].')
flags.DEFINE_float('alpha', 1., 'Beta concentration of T2.')
flags.DEFINE_float('tr', 0.5, 'Flip threshold of T2.')
flags.DEFINE_integer('count', 1, 'Number L of augmented examples.')
flags.DEFINE_boolean('same_class_pairs', False,
                     'Draw T2 partners from the source class.')
flags.DEFINE_string('grid', None, 'Optional image file for a qualitative '
                    'augmentation grid.')

_TARGETS = {'z': perturbations.GLOBAL_Z, 'nu': perturbations.LOCAL_NU}
_DISTRIBUTIONS = {'trunc-gaussian': perturbations.TRUNC_GAUSSIAN,
                  'uniform': perturbations.UNIFORM}


def _require(*names):
    missing = [n for n in names if FLAGS[n].value is None]
    if missing:
        raise errors.ConfigError('missing flags {}'.format(
            ', '.join('--' + n for n in missing)))


def _overrides(**mapping):
    """Config overrides from the flags the user actually set."""
    return {key: FLAGS[flag].value for key, flag in mapping.items()
            if FLAGS[flag].present}


def _config_dict():
    if FLAGS.config is None:
        return {}
    return config_lib.load_config_dict(FLAGS.config, level=FLAGS.level)


def generate_data():
    _require('out')
    d = _config_dict()
    d.update(_overrides(seed='seed', rho='rho', num_classes='num_classes',
                        n_train='n_train', n_test='n_test'))
    spec = generator.DatasetSpec.from_dict(d)
    dataset = generator.generate_dataset(spec,
                                         num_workers=FLAGS.num_workers or 1)
    dataset_io.save_dataset(dataset, FLAGS.out)
    annotations_lib.save_annotations(
        annotations_lib.annotations_from_split(dataset.test, dataset.palette),
        os.path.join(FLAGS.out, experiment.ANNOTATIONS_FILENAME))


def train_flow():
    _require('data', 'out')
    d = _config_dict()
    d.update(_overrides(seed='seed', epochs='epochs'))
    config = flow_training.FlowTrainConfig.from_dict(d)
    dataset = dataset_io.load_dataset(FLAGS.data)
    model, _ = flow_training.train_flow(dataset, config, log_dir=FLAGS.out)
    flow_checkpoint.save_flow(model, os.path.join(FLAGS.out, 'flow.ckpt'),
                              train_config=config.to_dict())


def augment():
    _require('flow', 'in', 'out')
    spec = augment_batch.AugmentationSpec(
        method=FLAGS.method,
        perturb=perturbations.PerturbSpec(
            distribution=_DISTRIBUTIONS[FLAGS.dist], mu=FLAGS.mu,
            sigma=FLAGS.sigma, bound=FLAGS.bound, low=FLAGS.low,
            high=FLAGS.high, target=_TARGETS[FLAGS.target],
            clamp_to_bound=FLAGS.clamp_to_bound),
        mix=perturbations.MixSpec(alpha=FLAGS.alpha, tr=FLAGS.tr,
                                  target=_TARGETS[FLAGS.target]),
        L=FLAGS.count,
        seed=FLAGS.seed or 0,
        same_class_pairs=FLAGS.same_class_pairs,
    )
    spec.validate()
    in_dir = FLAGS['in'].value
    model = flow_checkpoint.load_flow(FLAGS.flow)
    dataset = dataset_io.load_dataset(in_dir)
    augmented = augment_batch.augment_batch(
        model, dataset, spec, num_workers=FLAGS.num_workers or 1)
    record = augment_batch.provenance(spec, FLAGS.flow, in_dir)
    dataset_io.save_dataset(
        augment_batch.augmented_dataset(dataset, augmented, record), FLAGS.out)
    augment_batch.write_provenance(
        os.path.join(FLAGS.out, 'provenance.json'), spec, FLAGS.flow, in_dir)
    if FLAGS.grid is not None:
        figures.emit_augmentation_grid(
            model, dataset.test.images[:8], FLAGS.grid, perturb=spec.perturb,
            mix=spec.mix, seed=spec.seed)


def train():
    _require('data', 'out')
    d = _config_dict()
    d.update(_overrides(seed='seed', epochs='epochs', method='train_method',
                        flow_checkpoint='flow', num_workers='num_workers'))
    config = train_config_lib.TrainConfig.from_dict(d)
    dataset = dataset_io.load_dataset(FLAGS.data)
    trainer.train(dataset, config, out_dir=FLAGS.out)


def predict():
    _require('checkpoint', 'data', 'out')
    classifier = classifier_lib.load_classifier(FLAGS.checkpoint)
    dataset = dataset_io.load_dataset(FLAGS.data)
    trainer.write_predictions(trainer.predict(classifier, dataset.test),
                              FLAGS.out)


def evaluate():
    _require('predictions', 'out')
    if (FLAGS.annotations is None) == (FLAGS.data is None):
        raise errors.ConfigError(
            'give exactly one of --annotations and --data')
    annotations = experiment.load_test_annotations(FLAGS.data,
                                                   FLAGS.annotations)
    experiment.evaluate_predictions(
        FLAGS.predictions, annotations, FLAGS.out,
        grouping_path=FLAGS.grouping,
        exclude_others=bool(FLAGS.exclude_others))


def _experiment_config():
    _require('config')
    overrides = _overrides(out_dir='out', exclude_others='exclude_others',
                           num_workers='num_workers')
    if FLAGS['seed'].present:
        overrides['seeds'] = [FLAGS.seed]
    return config_lib.load_config(FLAGS.config, overrides, level=FLAGS.level)


def report():
    config = _experiment_config()
    experiment.summarize_experiment(config, FLAGS.out or config.out_dir)


def run():
    experiment.run_experiment(_experiment_config(), force=FLAGS.force)


SUBCOMMANDS = {
    'generate-data': generate_data,
    'train-flow': train_flow,
    'augment': augment,
    'train': train,
    'predict': predict,
    'evaluate': evaluate,
    'report': report,
    'run': run,
}


def dispatch(argv):
    """Run the subcommand named in argv[1] and return the exit code."""
    if len(argv) != 2 or argv[1] not in SUBCOMMANDS:
        logging.error('Usage: flowaug <subcommand> [--flags], subcommand one '
                      'of {}.'.format(', '.join(SUBCOMMANDS)))
        return 1
    try:
        SUBCOMMANDS[argv[1]]()
    except errors.VALIDATION_ERRORS as e:
        logging.error('{}: {}'.format(type(e).__name__, e))
        return 1
    except errors.StageFailure as e:
        logging.error(str(e))
        return 2
    except Exception as e:
        logging.exception('{} failed: {}'.format(argv[1], e))
        return 2
    return 0


def main(argv):
    return dispatch(argv)


def run_main():
    """Console-script entry point."""
    app.run(main)


if __name__ == '__main__':
    app.run(main)
