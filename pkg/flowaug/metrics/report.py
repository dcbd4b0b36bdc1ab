"""Discrepancy reports of single runs and summaries across runs.

A DiscrepancyReport is written as JSON with the fields

    per_class_sigma_w       {class name: weighted std}
    macro_std               float
    overall_weighted_std    float
    total_accuracy          float
    worst_subgroup          [{class, group, accuracy, class_accuracy, gap}]

and as a flat CSV with columns metric,class,group,value for spreadsheets.

Run summaries keep one row per (method, seed) run. Their CSV and JSON forms
round every statistic to four decimals, so two runs that agree to the printed
digits produce identical files.
"""

import collections
import dataclasses
import json
import logging
import os
from typing import Dict, List

import pandas as pd

from flowaug import errors
from flowaug import logs
from flowaug.synthdata import palettes
from . import correlation as correlation_lib
from . import discrepancy

SUMMARY_DECIMALS = 4
SUMMARY_COLUMNS = ('method', 'seed', 'total_accuracy', 'macro_std',
                   'weighted_std')
REPORT_CSV_COLUMNS = ('metric', 'class', 'group', 'value')


@dataclasses.dataclass
class DiscrepancyReport:
    per_class_sigma_w: Dict[str, float]
    macro_std: float
    overall_weighted_std: float
    total_accuracy: float
    worst_subgroup: List[Dict]

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = [f.name for f in dataclasses.fields(cls)]
        missing = [k for k in known if k not in d]
        if missing:
            raise errors.FormatError(
                'report is missing fields {}'.format(missing))
        return cls(**{k: d[k] for k in known})


def build_report(table, exclude_others=False):
    """Every discrepancy statistic of a SubgroupAccuracyTable.

    Args:
        table: Instance of subgroups.SubgroupAccuracyTable.
        exclude_others: Bool. Drop the "others" group before computing.

    Returns:
        Instance of DiscrepancyReport.

    Raises:
        errors.UndefinedVarianceError: No class has more than one example, so
            no dispersion statistic is defined.
    """
    if exclude_others and palettes.OTHERS in table.group_names:
        table = table.drop_groups([palettes.OTHERS])
    sigmas = discrepancy.per_class_weighted_std(table)
    if not sigmas:
        raise errors.UndefinedVarianceError(
            'cannot report on {} examples in {} classes: at least one class '
            'needs two or more examples'.format(
                int(table.counts.sum()), len(table.class_names)))
    worst = [w._asdict() for w in discrepancy.worst_subgroup(table)]
    for w in worst:
        w['class'] = w.pop('class_name')
    return DiscrepancyReport(
        per_class_sigma_w=dict(sigmas),
        macro_std=discrepancy.macro_std(sigmas.values()),
        overall_weighted_std=discrepancy.overall_weighted_std(table),
        total_accuracy=table.total_accuracy(),
        worst_subgroup=worst,
    )


def _ensure_dir(path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def write_report_json(report, path):
    _ensure_dir(path)
    with open(path, 'w') as f:
        json.dump(logs.serialize(report.to_dict()), f, indent=2,
                  sort_keys=True)


def read_report_json(path):
    try:
        with open(path) as f:
            d = json.load(f)
    except ValueError as e:
        raise errors.FormatError('{} is not valid JSON: {}'.format(path, e))
    return DiscrepancyReport.from_dict(d)


def report_frame(report):
    """Long DataFrame of a report, one statistic per row."""
    rows = [('sigma_w', c, '', s) for c, s in report.per_class_sigma_w.items()]
    for w in report.worst_subgroup:
        rows.append(('worst_accuracy', w['class'], w['group'], w['accuracy']))
        rows.append(('class_accuracy', w['class'], '', w['class_accuracy']))
        rows.append(('gap', w['class'], w['group'], w['gap']))
    rows.append(('macro_std', '', '', report.macro_std))
    rows.append(('overall_weighted_std', '', '', report.overall_weighted_std))
    rows.append(('total_accuracy', '', '', report.total_accuracy))
    return pd.DataFrame(rows, columns=list(REPORT_CSV_COLUMNS))


def write_report_csv(report, path):
    _ensure_dir(path)
    report_frame(report).to_csv(path, index=False)


@dataclasses.dataclass
class RunSummary:
    method: str
    seed: int
    total_accuracy: float
    macro_std: float
    weighted_std: float

    @classmethod
    def from_report(cls, method, seed, report):
        return cls(method, int(seed), report.total_accuracy, report.macro_std,
                   report.overall_weighted_std)


def summary_frame(summaries):
    """DataFrame of run summaries, rounded to SUMMARY_DECIMALS."""
    frame = pd.DataFrame([dataclasses.asdict(s) for s in summaries],
                         columns=list(SUMMARY_COLUMNS))
    return frame.round({c: SUMMARY_DECIMALS for c in SUMMARY_COLUMNS[2:]})


def method_means(summaries):
    """Mean and std over seeds of every method, methods in first-seen order."""
    frame = summary_frame(summaries)
    order = list(collections.OrderedDict.fromkeys(frame['method']))
    grouped = frame.drop(columns='seed').groupby('method', sort=False)
    means = grouped.mean().add_suffix('_mean')
    stds = grouped.std(ddof=1).fillna(0.).add_suffix('_std')
    out = pd.concat([means, stds], axis=1).loc[order].reset_index()
    return out.round(SUMMARY_DECIMALS)


def summarize_runs(summaries, kind=correlation_lib.PEARSON):
    """Correlations of total accuracy with the two dispersion statistics.

    Args:
        summaries: Sequence of RunSummary.
        kind: 'pearson' or 'spearman'.

    Returns:
        Dict with keys 'accuracy_vs_macro_std' and 'accuracy_vs_weighted_std'.
        A value is None where the correlation is undefined (fewer than three
        runs or a constant column); a warning is logged in that case.
    """
    accuracy = [s.total_accuracy for s in summaries]
    result = collections.OrderedDict()
    for name, attr in (('accuracy_vs_macro_std', 'macro_std'),
                       ('accuracy_vs_weighted_std', 'weighted_std')):
        try:
            result[name] = correlation_lib.correlation(
                accuracy, [getattr(s, attr) for s in summaries], kind)
        except errors.UndefinedCorrelationError as e:
            logging.warning('Skipping {}: {}'.format(name, e))
            result[name] = None
    return result


def write_summary(summaries, csv_path, json_path=None,
                  kind=correlation_lib.PEARSON):
    """Write the per-run summary table, and optionally a JSON echo.

    The JSON holds the rows, the per-method means and the correlations.
    """
    _ensure_dir(csv_path)
    frame = summary_frame(summaries)
    frame.to_csv(csv_path, index=False,
                 float_format='%.{}f'.format(SUMMARY_DECIMALS))
    if json_path is not None:
        correlations = summarize_runs(summaries, kind)
        payload = {
            'runs': frame.to_dict(orient='records'),
            'methods': method_means(summaries).to_dict(orient='records'),
            'correlation': {
                'kind': kind,
                **{k: None if v is None else round(v, SUMMARY_DECIMALS)
                   for k, v in correlations.items()}
            },
        }
        _ensure_dir(json_path)
        with open(json_path, 'w') as f:
            json.dump(logs.serialize(payload), f, indent=2, sort_keys=True)
    logging.info('Wrote summary of {} runs to {}.'.format(
        len(summaries), csv_path))


def read_summary(path):
    """Run summaries from a summary CSV."""
    frame = pd.read_csv(path)
    missing = [c for c in SUMMARY_COLUMNS if c not in frame.columns]
    if missing:
        raise errors.FormatError(
            'summary {} is missing columns {}'.format(path, missing))
    return [RunSummary(str(r.method), int(r.seed), float(r.total_accuracy),
                       float(r.macro_std), float(r.weighted_std))
            for r in frame.itertuples(index=False)]
