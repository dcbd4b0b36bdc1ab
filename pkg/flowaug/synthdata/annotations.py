"""Per-example background-group annotations.

The canonical file is a UTF-8 CSV with header `index,class_label,bg_group`.
`index` is the 0-based test index, `class_label` is kept verbatim (an integer
or a class name), and `bg_group` is a lowercase palette name or `others`.
Synthetic test splits are exported in the same format, so real and synthetic
data reach the metrics through one code path.
"""

import collections
import logging

import pandas as pd

from flowaug import errors
from . import palettes

COLUMNS = ('index', 'class_label', 'bg_group')

AnnotationRow = collections.namedtuple(
    'AnnotationRow', ['class_label', 'bg_group'])


class AnnotationTable(object):
    """Map from example index to (class_label, bg_group index)."""

    def __init__(self, palette, rows=None):
        """Constructor.

        Args:
            palette: Instance of palettes.Palette.
            rows: Optional dict from int index to AnnotationRow. Class labels
                are strings; groups are palette indices.
        """
        self.palette = palette
        self._rows = collections.OrderedDict()
        for index, row in sorted((rows or {}).items()):
            self.add(index, row.class_label, row.bg_group)

    def add(self, index, class_label, bg_group):
        index = int(index)
        if index in self._rows:
            raise errors.InvalidArgumentError(
                'duplicate annotation index {}'.format(index))
        self.palette.check_index(bg_group)
        self._rows[index] = AnnotationRow(str(class_label), int(bg_group))

    def __len__(self):
        return len(self._rows)

    def __contains__(self, index):
        return index in self._rows

    def __getitem__(self, index):
        return self._rows[index]

    def __eq__(self, other):
        return (isinstance(other, AnnotationTable) and
                self.palette == other.palette and
                dict(self._rows) == dict(other._rows))

    def items(self):
        return self._rows.items()

    def indices(self):
        return list(self._rows.keys())

    def to_frame(self):
        """DataFrame with columns index, class_label, bg_group (name)."""
        return pd.DataFrame(
            [(i, r.class_label, self.palette.name(r.bg_group))
             for i, r in self._rows.items()],
            columns=list(COLUMNS))


def load_annotations(path, palette=None, aliases=None):
    """Parse an annotation CSV.

    Args:
        path: String path of the CSV file.
        palette: Optional palettes.Palette. Defaults to the default palette.
        aliases: Optional dict of extra group-name aliases (e.g.
            {'grey': 'gray'}), merged over the palette's own.

    Returns:
        Instance of AnnotationTable.

    Raises:
        errors.ParseError: Missing column (row 0, the header), non-integer or
            duplicate index, or a group outside the palette. Data rows are
            numbered from 1.
    """
    if palette is None:
        palette = palettes.Palette()
    if aliases:
        d = palette.to_dict()
        d['aliases'] = dict(d['aliases'], **aliases)
        palette = palettes.Palette.from_dict(d)

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False,
                            encoding='utf-8')
    except pd.errors.EmptyDataError:
        raise errors.ParseError('empty annotation file {}'.format(path), row=0)
    frame.columns = [c.strip() for c in frame.columns]
    for column in COLUMNS:
        if column not in frame.columns:
            raise errors.ParseError(
                'missing column {!r} in {}'.format(column, path), row=0)

    table = AnnotationTable(palette)
    for row_number, (index, class_label, group) in enumerate(
            zip(frame['index'], frame['class_label'], frame['bg_group']),
            start=1):
        try:
            index = int(index.strip())
        except ValueError:
            raise errors.ParseError(
                'index {!r} is not an integer'.format(index), row=row_number)
        if index < 0:
            raise errors.ParseError(
                'negative index {}'.format(index), row=row_number)
        if index in table:
            raise errors.ParseError(
                'duplicate index {}'.format(index), row=row_number)
        group_index = palette.resolve(group)
        if group_index is None:
            raise errors.ParseError(
                'unknown background group {!r}'.format(group), row=row_number)
        table.add(index, class_label.strip(), group_index)

    logging.info('Loaded {} annotations from {}.'.format(len(table), path))
    return table


def save_annotations(table, path):
    """Write an AnnotationTable in the canonical CSV format."""
    table.to_frame().to_csv(path, index=False, encoding='utf-8')


def annotations_from_split(split, palette):
    """AnnotationTable of a LabeledSplit, class labels as decimal strings."""
    table = AnnotationTable(palette)
    for i in range(len(split)):
        table.add(i, int(split.class_labels[i]), int(split.bg_groups[i]))
    return table
