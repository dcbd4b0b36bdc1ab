"""End-to-end experiments.

run_experiment executes the stages

    data       generate the synthetic dataset (skipped for an existing one)
    flow       train the flow (only if a run needs it and no checkpoint is set)
    train/<run>/seed<k>      train one classifier
    predict/<run>/seed<k>    predict its test split
    evaluate/<run>/seed<k>   compute its discrepancy report
    summary    per-run summary table, correlations and figures

in this order, inside the experiment directory

    config.json                  resolved experiment config
    manifest.json                stage records, see manifest.py
    data/                        generated dataset (with annotations.csv)
    flow/                        flow.ckpt, flow_config.json, training log
    runs/<run>/seed<k>/          train_config.json, last.ckpt, best.ckpt,
                                 log.jsonl, predictions.csv, report.json,
                                 report.csv
    summary.csv, summary.json
    figures/                     subgroups_<run>.png, macro_std.png

Each stage's inputs digest covers its configuration and the outputs of the
stages it reads, so a stage is skipped exactly when nothing it depends on has
changed. Every stage records the stand-alone command that reproduces it.
"""

import collections
import json
import logging
import os
import time

from flowaug import errors
from flowaug import logs
from flowaug.flowcore import checkpoint as flow_checkpoint
from flowaug.flowcore import training as flow_training
from flowaug.metrics import report as report_lib
from flowaug.metrics import subgroups
from flowaug.synthdata import annotations as annotations_lib
from flowaug.synthdata import dataset_io
from flowaug.synthdata import generator
from flowaug.trainer import classifier as classifier_lib
from flowaug.trainer import training as trainer
from . import figures
from . import manifest as manifest_lib

COMMAND = 'flowaug'

STAGE_DATA = 'data'
STAGE_FLOW = 'flow'
STAGE_SUMMARY = 'summary'

ANNOTATIONS_FILENAME = 'annotations.csv'
PREDICTIONS_FILENAME = 'predictions.csv'
REPORT_JSON_FILENAME = 'report.json'
REPORT_CSV_FILENAME = 'report.csv'
TRAIN_CONFIG_FILENAME = 'train_config.json'


def run_stage_name(kind, run):
    return '{}/{}/seed{}'.format(kind, run.name, run.seed)


def run_dir(out_dir, run):
    return os.path.join(out_dir, 'runs', run.name, 'seed{}'.format(run.seed))


def write_json(obj, path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(logs.serialize(obj), f, indent=2, sort_keys=True)


def load_test_annotations(data_dir, annotations_path=None):
    """Annotations of a dataset's test split, from a CSV or from its labels."""
    if annotations_path is not None:
        return annotations_lib.load_annotations(annotations_path)
    dataset = dataset_io.load_dataset(data_dir)
    return annotations_lib.annotations_from_split(dataset.test,
                                                  dataset.palette)


def evaluate_predictions(predictions_path, annotations, out_dir,
                         grouping_path=None, exclude_others=False):
    """Write report.json and report.csv for a predictions CSV.

    Returns:
        Instance of report.DiscrepancyReport.
    """
    predictions = subgroups.load_predictions(predictions_path)
    table = subgroups.subgroup_accuracies(predictions, annotations)
    if grouping_path is not None:
        table = subgroups.regroup(table, subgroups.load_grouping(grouping_path))
    report = report_lib.build_report(table, exclude_others=exclude_others)
    os.makedirs(out_dir, exist_ok=True)
    report_lib.write_report_json(
        report, os.path.join(out_dir, REPORT_JSON_FILENAME))
    report_lib.write_report_csv(
        report, os.path.join(out_dir, REPORT_CSV_FILENAME))
    logging.info('Macro std {:.4f}, weighted std {:.4f}, accuracy {:.4f}.'
                 .format(report.macro_std, report.overall_weighted_std,
                         report.total_accuracy))
    return report


def summarize_experiment(config, out_dir):
    """Summary table, correlations and figures of an experiment's reports.

    Returns:
        List of written file paths.
    """
    reports = collections.OrderedDict()
    summaries = []
    for run in config.runs():
        path = os.path.join(run_dir(out_dir, run), REPORT_JSON_FILENAME)
        report = report_lib.read_report_json(path)
        reports.setdefault(run.name, []).append(report)
        summaries.append(report_lib.RunSummary.from_report(
            run.name, run.seed, report))
    csv_path = os.path.join(out_dir, 'summary.csv')
    json_path = os.path.join(out_dir, 'summary.json')
    report_lib.write_summary(summaries, csv_path, json_path,
                             kind=config.correlation)
    paths = [csv_path, json_path]
    if config.figures:
        paths += figures.emit_figures(reports, os.path.join(out_dir, 'figures'))
    return paths


class _Runner(object):
    """Runs or skips stages and keeps the manifest up to date."""

    def __init__(self, manifest, force):
        self._manifest = manifest
        self._force = force

    def fingerprint(self, stage):
        """Digest identifying a completed stage's inputs and outputs."""
        record = self._manifest.stages[stage]
        return manifest_lib.inputs_digest(record['inputs_digest'],
                                          record['outputs'])

    def run(self, stage, digest, command, action):
        """Execute action() unless the stage is current.

        action returns the list of produced files or directories.

        Raises:
            errors.StageFailure: action raised. The manifest keeps every stage
                completed so far and partial outputs stay on disk.
        """
        if not self._force and self._manifest.is_current(stage, digest):
            logging.info('Stage {} is up to date; skipping.'.format(stage))
            return False
        logging.info('Running stage {}.'.format(stage))
        start = time.time()
        try:
            outputs = action()
        except Exception as e:
            self._manifest.save()
            raise errors.StageFailure(stage, e) from e
        self._manifest.record(stage, digest, outputs, time.time() - start,
                              command)
        return True


def run_experiment(config, force=False):
    """Run every stage of an experiment.

    Args:
        config: Instance of config.ExperimentConfig.
        force: Bool. Re-run stages even if they are up to date.

    Returns:
        Instance of manifest.ExperimentManifest.

    Raises:
        errors.ConfigError: Invalid config, before any stage runs.
        errors.StageFailure: A stage failed; carries the stage name.
    """
    config.validate()
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    config_path = os.path.join(out_dir, 'config.json')
    write_json(config.to_dict(), config_path)
    manifest = manifest_lib.ExperimentManifest.load(out_dir)
    manifest.config = config.to_dict()
    runner = _Runner(manifest, force)
    logging.info('Running experiment {} in {}.'.format(config.name, out_dir))

    # Data
    if config.dataset_path is None:
        data_dir = os.path.join(out_dir, 'data')
        spec = config.dataset_spec()
        spec_path = os.path.join(out_dir, 'dataset_spec.json')
        write_json(spec.to_dict(), spec_path)

        def generate():
            dataset = generator.generate_dataset(
                spec, num_workers=config.num_workers)
            dataset_io.save_dataset(dataset, data_dir)
            annotations_lib.save_annotations(
                annotations_lib.annotations_from_split(
                    dataset.test, dataset.palette),
                os.path.join(data_dir, ANNOTATIONS_FILENAME))
            return [data_dir]

        runner.run(STAGE_DATA, manifest_lib.inputs_digest(spec.to_dict()),
                   [COMMAND, 'generate-data', '--config', spec_path,
                    '--out', data_dir], generate)
        data_fingerprint = runner.fingerprint(STAGE_DATA)
    else:
        data_dir = config.dataset_path
        data_fingerprint = manifest_lib.path_digest(data_dir)
    annotations_fingerprint = (
        data_fingerprint if config.annotations_path is None
        else manifest_lib.file_digest(config.annotations_path))

    # Flow
    flow_path = config.flow_checkpoint
    flow_fingerprint = None
    if config.needs_flow and flow_path is not None:
        flow_fingerprint = manifest_lib.file_digest(flow_path)
    elif config.needs_flow:
        flow_dir = os.path.join(out_dir, 'flow')
        flow_path = os.path.join(flow_dir, 'flow.ckpt')
        flow_config = config.flow_config()
        flow_config_path = os.path.join(flow_dir, 'flow_config.json')

        def train_flow():
            dataset = dataset_io.load_dataset(data_dir)
            model, _ = flow_training.train_flow(dataset, flow_config,
                                                log_dir=flow_dir)
            flow_checkpoint.save_flow(model, flow_path,
                                      train_config=flow_config.to_dict())
            return [flow_dir]

        os.makedirs(flow_dir, exist_ok=True)
        write_json(flow_config.to_dict(), flow_config_path)
        runner.run(STAGE_FLOW,
                   manifest_lib.inputs_digest(flow_config.to_dict(),
                                              data_fingerprint),
                   [COMMAND, 'train-flow', '--config', flow_config_path,
                    '--data', data_dir, '--out', flow_dir], train_flow)
        flow_fingerprint = runner.fingerprint(STAGE_FLOW)

    # Classifiers
    flow = None
    for run in config.runs():
        directory = run_dir(out_dir, run)
        train_config = run.config
        if train_config.uses_flow:
            train_config.flow_checkpoint = flow_path
        train_config_path = os.path.join(directory, TRAIN_CONFIG_FILENAME)
        write_json(train_config.to_dict(), train_config_path)

        def train_classifier(train_config=train_config, directory=directory):
            nonlocal flow
            if train_config.uses_flow and flow is None:
                flow = flow_checkpoint.load_flow(flow_path)
            dataset = dataset_io.load_dataset(data_dir)
            _, log = trainer.train(
                dataset, train_config, out_dir=directory,
                flow=flow if train_config.uses_flow else None)
            outputs = [train_config_path, log.last_checkpoint,
                       os.path.join(directory, 'log.jsonl'),
                       os.path.join(directory, 'description.txt')]
            if log.best_checkpoint is not None:
                outputs.append(log.best_checkpoint)
            return outputs

        stage = run_stage_name('train', run)
        command = [COMMAND, 'train', '--config', train_config_path,
                   '--data', data_dir, '--out', directory]
        if train_config.uses_flow:
            command += ['--flow', flow_path]
        runner.run(
            stage,
            manifest_lib.inputs_digest(
                train_config.to_dict(), data_fingerprint,
                flow_fingerprint if train_config.uses_flow else None),
            command, train_classifier)
        train_fingerprint = runner.fingerprint(stage)

        checkpoint_path = os.path.join(directory, 'last.ckpt')
        predictions_path = os.path.join(directory, PREDICTIONS_FILENAME)

        def predict(checkpoint_path=checkpoint_path,
                    predictions_path=predictions_path):
            classifier = classifier_lib.load_classifier(checkpoint_path)
            dataset = dataset_io.load_dataset(data_dir)
            trainer.write_predictions(
                trainer.predict(classifier, dataset.test), predictions_path)
            return [predictions_path]

        stage = run_stage_name('predict', run)
        runner.run(
            stage,
            manifest_lib.inputs_digest(train_fingerprint, data_fingerprint),
            [COMMAND, 'predict', '--checkpoint', checkpoint_path,
             '--data', data_dir, '--out', predictions_path], predict)
        predict_fingerprint = runner.fingerprint(stage)

        def evaluate(predictions_path=predictions_path, directory=directory):
            annotations = load_test_annotations(data_dir,
                                                config.annotations_path)
            evaluate_predictions(predictions_path, annotations, directory,
                                 grouping_path=config.grouping_path,
                                 exclude_others=config.exclude_others)
            return [os.path.join(directory, REPORT_JSON_FILENAME),
                    os.path.join(directory, REPORT_CSV_FILENAME)]

        command = [COMMAND, 'evaluate', '--predictions', predictions_path,
                   '--out', directory]
        if config.annotations_path is None:
            command += ['--data', data_dir]
        else:
            command += ['--annotations', config.annotations_path]
        if config.grouping_path is not None:
            command += ['--grouping', config.grouping_path]
        if config.exclude_others:
            command += ['--exclude_others']
        grouping_fingerprint = (
            None if config.grouping_path is None
            else manifest_lib.file_digest(config.grouping_path))
        runner.run(
            run_stage_name('evaluate', run),
            manifest_lib.inputs_digest(
                predict_fingerprint, annotations_fingerprint,
                grouping_fingerprint, config.exclude_others),
            command, evaluate)

    # Summary
    evaluate_fingerprints = [
        runner.fingerprint(run_stage_name('evaluate', run))
        for run in config.runs()
    ]
    runner.run(
        STAGE_SUMMARY,
        manifest_lib.inputs_digest(evaluate_fingerprints, config.correlation,
                                   config.figures, config.run_names()),
        [COMMAND, 'report', '--config', config_path, '--out', out_dir],
        lambda: summarize_experiment(config, out_dir))
    manifest.save()
    logging.info('Experiment {} finished.'.format(config.name))
    return manifest
