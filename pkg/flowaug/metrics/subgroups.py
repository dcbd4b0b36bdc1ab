"""Per-(class, group) accuracy tables built from predictions and annotations.

Class labels are kept as strings so that integer classes of synthetic data and
named classes of real datasets go through the same code. Groups are the names
of a background palette, "others" included.
"""

import logging

import numpy as np
import pandas as pd

from flowaug import errors
from flowaug.synthdata import palettes

PREDICTION_COLUMNS = ('index', 'true_class', 'pred_class')


def _class_sort_key(names):
    """Numeric order if every class name is an integer, else lexicographic."""
    try:
        ints = [int(n) for n in names]
    except ValueError:
        return sorted(names)
    return [n for _, n in sorted(zip(ints, names))]


class SubgroupAccuracyTable(object):
    """Counts n[c, g] and correct predictions k[c, g].

    The accuracy s[c, g] = k[c, g] / n[c, g] is defined only where n > 0.
    """

    def __init__(self, class_names, group_names, counts, correct):
        """Constructor.

        Args:
            class_names: Sequence of strings, one per row.
            group_names: Sequence of strings, one per column.
            counts: Int array [C, G] of example counts.
            correct: Int array [C, G] of correctly classified examples.
        """
        self.class_names = [str(c) for c in class_names]
        self.group_names = [str(g) for g in group_names]
        self.counts = np.asarray(counts, dtype=np.int64)
        self.correct = np.asarray(correct, dtype=np.int64)
        shape = (len(self.class_names), len(self.group_names))
        if self.counts.shape != shape or self.correct.shape != shape:
            raise errors.InvalidArgumentError(
                'counts {} and correct {} must have shape {}'.format(
                    self.counts.shape, self.correct.shape, shape))
        if (self.counts < 0).any() or (self.correct < 0).any() or (
                self.correct > self.counts).any():
            raise errors.InvalidArgumentError(
                'need 0 <= correct <= counts in every cell')

    @property
    def num_classes(self):
        return len(self.class_names)

    @property
    def accuracies(self):
        """Float array [C, G] with NaN in empty cells."""
        with np.errstate(invalid='ignore', divide='ignore'):
            return np.where(self.counts > 0,
                            self.correct / np.maximum(self.counts, 1), np.nan)

    def accuracy(self, class_name, group_name):
        c = self.class_names.index(str(class_name))
        g = self.group_names.index(str(group_name))
        return None if self.counts[c, g] == 0 else float(
            self.correct[c, g] / self.counts[c, g])

    def count(self, class_name, group_name):
        c = self.class_names.index(str(class_name))
        g = self.group_names.index(str(group_name))
        return int(self.counts[c, g])

    def populated(self, c):
        """Column indices of the non-empty cells of row c."""
        return np.flatnonzero(self.counts[c] > 0)

    def class_accuracy(self, c):
        n = self.counts[c].sum()
        return None if n == 0 else float(self.correct[c].sum() / n)

    def total_accuracy(self):
        n = self.counts.sum()
        if n == 0:
            raise errors.InvalidArgumentError('accuracy of an empty table')
        return float(self.correct.sum() / n)

    def drop_groups(self, names):
        """Table without the named group columns."""
        names = {str(n) for n in names}
        keep = [g for g, name in enumerate(self.group_names)
                if name not in names]
        return SubgroupAccuracyTable(
            self.class_names, [self.group_names[g] for g in keep],
            self.counts[:, keep], self.correct[:, keep])

    def __eq__(self, other):
        return (isinstance(other, SubgroupAccuracyTable) and
                self.class_names == other.class_names and
                self.group_names == other.group_names and
                np.array_equal(self.counts, other.counts) and
                np.array_equal(self.correct, other.correct))

    def to_frame(self):
        """Long DataFrame: class, group, count, correct, accuracy per cell."""
        acc = self.accuracies
        rows = []
        for c, class_name in enumerate(self.class_names):
            for g, group_name in enumerate(self.group_names):
                rows.append((class_name, group_name, int(self.counts[c, g]),
                             int(self.correct[c, g]),
                             None if np.isnan(acc[c, g]) else acc[c, g]))
        return pd.DataFrame(
            rows, columns=['class', 'group', 'count', 'correct', 'accuracy'])


def load_predictions(path):
    """Read a predictions CSV with columns index,true_class,pred_class.

    Raises:
        errors.ParseError: Missing column or non-integer index.
    """
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    frame.columns = [c.strip() for c in frame.columns]
    for column in PREDICTION_COLUMNS:
        if column not in frame.columns:
            raise errors.ParseError(
                'missing column {!r} in {}'.format(column, path), row=0)
    try:
        frame['index'] = frame['index'].str.strip().astype(np.int64)
    except ValueError as e:
        raise errors.ParseError('non-integer index in {}: {}'.format(path, e))
    return frame[list(PREDICTION_COLUMNS)]


def _as_frame(predictions):
    if isinstance(predictions, pd.DataFrame):
        frame = predictions
    else:
        frame = pd.DataFrame(list(predictions), columns=PREDICTION_COLUMNS)
    frame = frame[list(PREDICTION_COLUMNS)].copy()
    frame['index'] = frame['index'].astype(np.int64)
    for column in ('true_class', 'pred_class'):
        frame[column] = frame[column].astype(str).str.strip()
    return frame


def subgroup_accuracies(predictions, annotations, exclude_others=False):
    """Join predictions with annotations and count per (class, group).

    Args:
        predictions: DataFrame or rows (index, true_class, pred_class).
        annotations: synthdata.AnnotationTable mapping index to group.
        exclude_others: Bool. Drop the "others" group column.

    Returns:
        Instance of SubgroupAccuracyTable. Columns are all palette groups in
        palette order, so unpopulated groups appear as empty cells.

    Raises:
        errors.JoinError: Prediction indices absent from the annotations.
    """
    frame = _as_frame(predictions)
    missing = [int(i) for i in frame['index'] if int(i) not in annotations]
    if missing:
        raise errors.JoinError(missing)
    if frame['index'].duplicated().any():
        raise errors.InvalidArgumentError('duplicate prediction indices {}'
                                          .format(sorted(set(frame['index'][
                                              frame['index'].duplicated()]))))

    rows = [annotations[int(i)] for i in frame['index']]
    frame['bg_group'] = [r.bg_group for r in rows]
    mismatched = sum(r.class_label != t
                     for r, t in zip(rows, frame['true_class']))
    if mismatched:
        logging.warning(
            '{} predictions disagree with the annotated class; using the '
            'prediction file\'s true_class.'.format(mismatched))
    frame['correct'] = (frame['true_class'] == frame['pred_class']).astype(int)

    palette = annotations.palette
    class_names = _class_sort_key(sorted(set(frame['true_class'])))
    group_names = list(palette.names)
    counts = np.zeros((len(class_names), len(group_names)), dtype=np.int64)
    correct = np.zeros_like(counts)
    class_pos = {c: i for i, c in enumerate(class_names)}
    grouped = frame.groupby(['true_class', 'bg_group'])['correct'].agg(
        ['count', 'sum'])
    for (class_name, group), (n, k) in grouped.iterrows():
        counts[class_pos[class_name], int(group)] = n
        correct[class_pos[class_name], int(group)] = k
    table = SubgroupAccuracyTable(class_names, group_names, counts, correct)
    if exclude_others:
        table = table.drop_groups([palettes.OTHERS])
    return table


def regroup(table, grouping):
    """Pool classes into superclasses.

    Args:
        table: Instance of SubgroupAccuracyTable.
        grouping: Dict from class name to superclass name. Keys are compared
            as strings and must cover every class of the table.

    Returns:
        SubgroupAccuracyTable over superclasses, in order of first appearance.
        Pooled counts are sums and pooled accuracies are count-weighted means.
    """
    grouping = {str(k): str(v) for k, v in grouping.items()}
    unmapped = [c for c in table.class_names if c not in grouping]
    if unmapped:
        raise errors.InvalidArgumentError(
            'classes {} have no superclass'.format(unmapped))
    supers = []
    for c in table.class_names:
        if grouping[c] not in supers:
            supers.append(grouping[c])
    counts = np.zeros((len(supers), len(table.group_names)), dtype=np.int64)
    correct = np.zeros_like(counts)
    for c, class_name in enumerate(table.class_names):
        s = supers.index(grouping[class_name])
        counts[s] += table.counts[c]
        correct[s] += table.correct[c]
    return SubgroupAccuracyTable(supers, table.group_names, counts, correct)


def load_grouping(path):
    """Read a CSV with columns class,superclass into a dict."""
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    frame.columns = [c.strip() for c in frame.columns]
    for column in ('class', 'superclass'):
        if column not in frame.columns:
            raise errors.ParseError(
                'missing column {!r} in {}'.format(column, path), row=0)
    grouping = {}
    for row, (c, s) in enumerate(zip(frame['class'], frame['superclass']),
                                 start=1):
        c = c.strip()
        if c in grouping:
            raise errors.ParseError('duplicate class {!r}'.format(c), row=row)
        grouping[c] = s.strip()
    return grouping
