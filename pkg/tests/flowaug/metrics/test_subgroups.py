"""Tests for flowaug/metrics/subgroups.py.

To run this test, navigate to this directory and run
```bash
$ pytest test_subgroups.py
```
"""

import sys
sys.path.insert(0, '../../..')  # Allow imports from flowaug codebase

import numpy as np
import pandas as pd
import pytest

from flowaug import errors
from flowaug.metrics import subgroups
from flowaug.synthdata import annotations as annotations_lib
from flowaug.synthdata import palettes


def _annotations(rows):
    palette = palettes.Palette()
    table = annotations_lib.AnnotationTable(palette)
    for index, class_label, group in rows:
        table.add(index, class_label, palette.index(group))
    return table


class TestSubgroupAccuracies():

    def testHalfCorrectCell(self):
        annotations = _annotations([(0, 'cat', 'blue'), (1, 'cat', 'blue')])
        predictions = [(0, 'cat', 'cat'), (1, 'cat', 'dog')]
        table = subgroups.subgroup_accuracies(predictions, annotations)
        assert table.accuracy('cat', 'blue') == pytest.approx(0.5)
        assert table.count('cat', 'blue') == 2
        assert table.accuracy('cat', 'green') is None
        assert table.group_names == list(palettes.Palette().names)

    def testAllCorrect(self):
        annotations = _annotations([
            (0, '0', 'blue'), (1, '0', 'red'), (2, '1', 'red'),
            (3, '1', 'others')])
        predictions = [(i, a.class_label, a.class_label)
                       for i, a in annotations.items()]
        table = subgroups.subgroup_accuracies(predictions, annotations)
        acc = table.accuracies
        assert np.all(acc[~np.isnan(acc)] == 1.)
        assert table.total_accuracy() == 1.

    def testNumericClassOrder(self):
        annotations = _annotations([
            (0, '10', 'blue'), (1, '2', 'blue'), (2, '1', 'green')])
        predictions = [(i, a.class_label, '1')
                       for i, a in annotations.items()]
        table = subgroups.subgroup_accuracies(predictions, annotations)
        assert table.class_names == ['1', '2', '10']

    def testRowOrderInvariant(self):
        rng = np.random.default_rng(3)
        groups = palettes.Palette().names
        rows = [(i, str(rng.integers(3)), groups[rng.integers(len(groups))])
                for i in range(60)]
        annotations = _annotations(rows)
        predictions = [(i, c, str(rng.integers(3))) for i, c, _ in rows]
        table = subgroups.subgroup_accuracies(predictions, annotations)
        shuffled = [predictions[i] for i in rng.permutation(60)]
        assert subgroups.subgroup_accuracies(shuffled, annotations) == table

    def testMissingIndex(self):
        annotations = _annotations([(0, 'cat', 'blue')])
        with pytest.raises(errors.JoinError) as error:
            subgroups.subgroup_accuracies(
                [(0, 'cat', 'cat'), (5, 'cat', 'cat'), (3, 'cat', 'dog')],
                annotations)
        assert error.value.missing == [3, 5]

    def testDuplicateIndex(self):
        annotations = _annotations([(0, 'cat', 'blue')])
        with pytest.raises(errors.InvalidArgumentError):
            subgroups.subgroup_accuracies(
                [(0, 'cat', 'cat'), (0, 'cat', 'dog')], annotations)

    def testExcludeOthers(self):
        annotations = _annotations([(0, 'a', 'others'), (1, 'a', 'blue')])
        predictions = [(0, 'a', 'a'), (1, 'a', 'b')]
        table = subgroups.subgroup_accuracies(predictions, annotations,
                                              exclude_others=True)
        assert palettes.OTHERS not in table.group_names
        assert table.total_accuracy() == 0.

    def testAcceptsDataFrame(self):
        annotations = _annotations([(0, 'a', 'blue'), (1, 'a', 'blue')])
        frame = pd.DataFrame({'index': [0, 1], 'true_class': ['a', 'a'],
                              'pred_class': ['a', 'a']})
        table = subgroups.subgroup_accuracies(frame, annotations)
        assert table.count('a', 'blue') == 2


class TestTable():

    def testShapeMismatch(self):
        with pytest.raises(errors.InvalidArgumentError):
            subgroups.SubgroupAccuracyTable(['a'], ['x', 'y'], [[1]], [[1]])

    def testCorrectExceedsCount(self):
        with pytest.raises(errors.InvalidArgumentError):
            subgroups.SubgroupAccuracyTable(['a'], ['x'], [[1]], [[2]])

    def testEmptyTableHasNoAccuracy(self):
        table = subgroups.SubgroupAccuracyTable(['a'], ['x'], [[0]], [[0]])
        with pytest.raises(errors.InvalidArgumentError):
            table.total_accuracy()


class TestRegroup():

    def _table(self):
        return subgroups.SubgroupAccuracyTable(
            ['0', '1', '2'], ['blue', 'green'],
            [[3, 1], [1, 3], [2, 2]], [[3, 0], [1, 2], [2, 1]])

    def testIdentityGrouping(self):
        table = self._table()
        assert subgroups.regroup(table, {'0': '0', '1': '1', '2': '2'}) == (
            table)

    def testPooledCountsAndAccuracy(self):
        pooled = subgroups.regroup(self._table(),
                                   {0: 'x', 1: 'x', 2: 'y'})
        assert pooled.class_names == ['x', 'y']
        assert pooled.count('x', 'green') == 4
        assert pooled.accuracy('x', 'green') == pytest.approx(0.5)
        assert pooled.accuracy('x', 'blue') == pytest.approx(1.)

    def testUnmappedClass(self):
        with pytest.raises(errors.InvalidArgumentError):
            subgroups.regroup(self._table(), {'0': 'x', '1': 'x'})


class TestFiles():

    def testLoadPredictions(self, tmp_path):
        path = tmp_path / 'predictions.csv'
        path.write_text('index,true_class,pred_class\n0,1,1\n1,2,0\n')
        frame = subgroups.load_predictions(str(path))
        assert list(frame['index']) == [0, 1]
        assert list(frame['pred_class']) == ['1', '0']

    def testLoadPredictionsMissingColumn(self, tmp_path):
        path = tmp_path / 'predictions.csv'
        path.write_text('index,true_class\n0,1\n')
        with pytest.raises(errors.ParseError) as error:
            subgroups.load_predictions(str(path))
        assert error.value.row == 0

    def testLoadGrouping(self, tmp_path):
        path = tmp_path / 'grouping.csv'
        path.write_text('class,superclass\n0,vehicle\n1,animal\n')
        assert subgroups.load_grouping(str(path)) == {
            '0': 'vehicle', '1': 'animal'}

    def testLoadGroupingDuplicate(self, tmp_path):
        path = tmp_path / 'grouping.csv'
        path.write_text('class,superclass\n0,vehicle\n0,animal\n')
        with pytest.raises(errors.ParseError) as error:
            subgroups.load_grouping(str(path))
        assert error.value.row == 2
