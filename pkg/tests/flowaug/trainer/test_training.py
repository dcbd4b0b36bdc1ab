"""Tests for flowaug/trainer/config.py and training.py.

To run this test, navigate to this directory and run
```bash
$ pytest test_training.py
```
"""

import sys
sys.path.insert(0, '../../..')  # Allow imports from flowaug codebase

import os

import numpy as np
import pandas as pd
import pytest
import torch
from torch import nn

from flowaug import errors
from flowaug import logs
from flowaug.augment import perturbations
from flowaug.flowcore import flow_model
from flowaug.synthdata import generator
from flowaug.trainer import classifier
from flowaug.trainer import config as config_lib
from flowaug.trainer import losses
from flowaug.trainer import train_transforms
from flowaug.trainer import training

_WIDTHS = (4, 4, 8, 8)


@pytest.fixture(scope='module')
def dataset():
    spec = generator.DatasetSpec(
        num_classes=2, palette=('blue', 'green'), n_train=24, n_test=12,
        rho=0.9, seed=0, image_size=8)
    return generator.generate_dataset(spec)


@pytest.fixture(scope='module')
def flow():
    torch.manual_seed(0)
    model = flow_model.FlowModel(image_shape=(8, 8, 3), d_z=4, num_blocks=2,
                                 hidden_channels=4, cond_channels=2,
                                 encoder_channels=4)
    model.eval()
    return model


@pytest.fixture(scope='module')
def perturbed_flow():
    torch.manual_seed(0)
    model = flow_model.FlowModel(image_shape=(8, 8, 3), d_z=4, num_blocks=2,
                                 hidden_channels=4, cond_channels=2,
                                 encoder_channels=4)
    for block in model.blocks:
        nn.init.normal_(block.network.net[-1].weight, std=0.1)
    model.eval()
    return model


def _config(**kwargs):
    fields = dict(epochs=2, batch_size=8, widths=_WIDTHS, seed=1)
    fields.update(kwargs)
    return config_lib.TrainConfig(**fields)


class TestTrainConfig():

    def testDefaults(self):
        config = config_lib.TrainConfig()
        assert config.lr == pytest.approx(0.1)
        assert config.lr_decay_epochs == [15, 22]
        config.validate()

    def testScaledLearningRate(self):
        assert config_lib.TrainConfig(batch_size=64).lr == pytest.approx(0.05)

    @pytest.mark.parametrize('method', config_lib.FLOW_METHODS)
    def testFlowMethodsNeedCheckpoint(self, method):
        config = config_lib.TrainConfig(method=method)
        with pytest.raises(errors.ConfigError):
            config.validate()
        config.validate(require_flow_checkpoint=False)

    @pytest.mark.parametrize('kwargs', [
        dict(method='erm'),
        dict(epochs=0),
        dict(lr=0.),
        dict(lr_decay_epochs=[5, 3]),
        dict(lam=-1.),
        dict(lambda2=-0.1),
        dict(K=0),
        dict(plus_std_family='cutmix'),
        dict(widths=(4, 4, 8)),
        dict(perturb={'sigma': 0.}),
        dict(mix={'tr': 2.}),
    ])
    def testInvalid(self, kwargs):
        with pytest.raises(errors.ConfigError):
            config_lib.TrainConfig(**kwargs).validate()

    def testDictRoundTrip(self):
        config = _config(method=config_lib.COMBINE, perturb={'sigma': 0.3},
                         lambda2=config_lib.LAMBDA2_GRID[0])
        assert config.perturb.sigma == 0.3
        assert config_lib.TrainConfig.from_dict(config.to_dict()) == config

    def testUnknownKey(self):
        with pytest.raises(errors.ConfigError):
            config_lib.TrainConfig.from_dict({'methdo': 'standard'})


class TestTrain():

    def testStandardRun(self, dataset, tmp_path):
        out_dir = str(tmp_path / 'run')
        model, log = training.train(dataset, _config(), out_dir=out_dir)
        assert [r['epoch'] for r in log.epochs] == [1, 2]
        assert len(log.step_losses) == 2 * 3
        assert 0. <= log.last_accuracy <= 1.
        assert log.best_accuracy >= log.last_accuracy
        assert os.path.isfile(log.last_checkpoint)
        assert os.path.isfile(log.best_checkpoint)
        assert logs.read_log(os.path.join(out_dir, 'log.jsonl')) == log.epochs

        loaded = classifier.load_classifier(log.last_checkpoint)
        pd.testing.assert_frame_equal(training.predict(model, dataset.test),
                                      training.predict(loaded, dataset.test))

    def testDeterministic(self, dataset):
        _, log_a = training.train(dataset, _config())
        _, log_b = training.train(dataset, _config())
        assert log_a.step_losses == log_b.step_losses

    @pytest.mark.parametrize('method', config_lib.METHODS)
    def testEveryMethodRuns(self, dataset, flow, method):
        config = _config(method=method, epochs=1, cutout_size=3)
        _, log = training.train(dataset, config, flow=flow)
        assert np.all(np.isfinite(log.step_losses))

    @pytest.mark.parametrize('precompute', [True, False])
    def testFlowaugWithSeveralTransforms(self, dataset, flow, precompute):
        config = _config(method=config_lib.FLOWAUG_GAUSS, epochs=1, K=2,
                         precompute=precompute)
        _, log = training.train(dataset, config, flow=flow)
        expected_steps = 6 if precompute else 3
        assert len(log.step_losses) == expected_steps

    def testMissingFlowCheckpoint(self, dataset, tmp_path):
        config = _config(method=config_lib.FLOWAUG_MIX,
                         flow_checkpoint=str(tmp_path / 'missing.ckpt'))
        with pytest.raises(errors.ConfigError):
            training.train(dataset, config)


class TestFlowaugCutmix():

    def _transforms(self, flow):
        gaussian = train_transforms.FlowGaussian(
            flow, perturbations.PerturbSpec(sigma=0.5, bound=2.))
        cutmix = train_transforms.Cutmix(1.)
        return gaussian, cutmix, train_transforms.Compose(gaussian, cutmix)

    def testDiffersFromEitherPart(self, dataset, perturbed_flow):
        gaussian, cutmix, composed = self._transforms(perturbed_flow)
        x = dataset.train.images[:8]
        y = losses.one_hot(dataset.train.class_labels[:8], 2)
        pasted = 0
        for seed in range(10):
            out, _ = composed(x, y, np.random.default_rng(seed))
            flow_only, _ = gaussian(x, y, np.random.default_rng(seed))
            cutmix_only, _ = cutmix(x, y, np.random.default_rng(seed))
            pasted += int(not np.array_equal(out, flow_only))
            assert not np.allclose(out, cutmix_only, atol=1e-3)
        assert pasted > 0

    @pytest.mark.parametrize('seed', range(20))
    def testTargetsHoldPastedArea(self, perturbed_flow, seed):
        gaussian, _, composed = self._transforms(perturbed_flow)
        n = 6
        x = np.random.default_rng(seed).uniform(size=(n, 8, 8, 3))
        x = x.astype(np.float32)
        # One class per image, so an image's own mass is its kept area
        y = np.eye(n)
        out, y_t = composed(x, y, np.random.default_rng(seed))
        flow_only, _ = gaussian(x, y, np.random.default_rng(seed))
        pasted = np.any(out != flow_only, axis=-1).mean(axis=(1, 2))
        np.testing.assert_allclose(pasted, 1. - np.diag(y_t), atol=1e-9)
        np.testing.assert_allclose(y_t.sum(axis=1), 1.)

    def testLossDecreases(self, perturbed_flow):
        spec = generator.DatasetSpec(
            num_classes=2, palette=('blue', 'green'), n_train=48, n_test=8,
            rho=0.9, seed=0, image_size=8)
        data = generator.generate_dataset(spec)
        decreased = 0
        for seed in range(20):
            config = _config(method=config_lib.FLOWAUG_GAUSS_CUTMIX,
                             epochs=10, lr=0.05, seed=seed)
            _, log = training.train(data, config, flow=perturbed_flow)
            first, last = log.epochs[0], log.epochs[-1]
            decreased += int(last['train_loss'] < first['train_loss'])
        assert decreased >= 18


class TestPredictions():

    def testPredictAndWrite(self, dataset, tmp_path):
        torch.manual_seed(0)
        model = classifier.ConvClassifier(2, widths=_WIDTHS)
        rows = training.predict(model, dataset.test)
        assert list(rows.columns) == training.PREDICTION_COLUMNS
        assert list(rows['index']) == list(range(len(dataset.test)))
        np.testing.assert_array_equal(rows['true_class'],
                                      dataset.test.class_labels)
        path = str(tmp_path / 'predictions.csv')
        training.write_predictions(rows, path)
        pd.testing.assert_frame_equal(pd.read_csv(path), rows,
                                      check_dtype=False)

    def testAccuracyOfEmptySplit(self, dataset):
        model = classifier.ConvClassifier(2, widths=_WIDTHS)
        assert training.evaluate_accuracy(model, dataset.test.subset([])) is (
            None)
