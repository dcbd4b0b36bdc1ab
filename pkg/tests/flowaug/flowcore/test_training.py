"""Tests for flowaug/flowcore/training.py and checkpoint.py.

To run this test, navigate to this directory and run
```bash
$ pytest test_training.py
```
"""

import sys
sys.path.insert(0, '../../..')  # Allow imports from flowaug codebase

import numpy as np
import pytest
import torch

from flowaug import checkpoints
from flowaug import errors
from flowaug import logs
from flowaug.flowcore import checkpoint
from flowaug.flowcore import flow_model
from flowaug.flowcore import training
from flowaug.synthdata import generator


def _config(**kwargs):
    fields = dict(epochs=2, batch_size=8, d_z=4, num_blocks=2,
                  hidden_channels=8, cond_channels=4, encoder_channels=8,
                  eval_batch_size=16, seed=3)
    fields.update(kwargs)
    return training.FlowTrainConfig(**fields)


def _images(n, seed=0):
    rng = np.random.default_rng(seed)
    return (rng.integers(0, 256, size=(n, 4, 4, 3)) / 255.).astype(np.float32)


class TestFlowTrainConfig():

    @pytest.mark.parametrize('kwargs', [
        dict(epochs=0),
        dict(learning_rate=0.),
        dict(lr_decay=1.5),
        dict(kl_warmup_fraction=2.),
        dict(grad_clip=0.),
        dict(epsilon=0.5),
        dict(d_z=0),
    ])
    def testInvalid(self, kwargs):
        with pytest.raises(errors.ConfigError):
            _config(**kwargs).validate()

    def testDictRoundTrip(self):
        config = _config()
        assert training.FlowTrainConfig.from_dict(config.to_dict()) == config

    def testUnknownKey(self):
        with pytest.raises(errors.ConfigError):
            training.FlowTrainConfig.from_dict({'epoch': 3})


class TestKlWeight():

    @pytest.mark.parametrize('step, expected', [(0, 0.1), (4, 0.5), (9, 1.),
                                                (50, 1.)])
    def testWarmup(self, step, expected):
        assert training.kl_weight(step, 100, 0.1) == pytest.approx(expected)

    def testNoWarmup(self):
        assert training.kl_weight(0, 100, 0.) == 1.


class TestTrainFlow():

    def testHistoryAndLog(self, tmp_path):
        model, history = training.train_flow(
            _images(20), _config(), eval_data=_images(6, seed=1),
            log_dir=str(tmp_path))
        assert [r['epoch'] for r in history] == [1, 2]
        for record in history:
            assert np.isfinite(record['train_bpd'])
            assert np.isfinite(record['eval_bpd'])
        assert history[-1]['kl_weight'] == 1.
        assert history[1]['learning_rate'] == pytest.approx(
            history[0]['learning_rate'] * 0.98)
        assert logs.read_log(str(tmp_path / 'log.jsonl')) == history
        assert not model.training

    def testDeterministic(self):
        model_a, history_a = training.train_flow(_images(16), _config())
        model_b, history_b = training.train_flow(_images(16), _config())
        assert history_a == history_b
        for a, b in zip(model_a.state_dict().values(),
                        model_b.state_dict().values()):
            assert torch.equal(a, b)

    def testBpdDecreasesOnSyntheticData(self):
        spec = generator.DatasetSpec(num_classes=2, palette=('blue', 'green'),
                                     n_train=64, n_test=16, image_size=8)
        config = _config(epochs=20, learning_rate=5e-3)
        _, history = training.train_flow(generator.generate_dataset(spec),
                                         config)
        assert history[-1]['train_bpd'] < history[0]['train_bpd']
        assert history[-1]['train_bpd'] < 8.
        assert history[-1]['eval_bpd'] < 8.

    def testEmptyData(self):
        with pytest.raises(errors.InvalidArgumentError):
            training.train_flow(np.zeros((0, 4, 4, 3), np.float32), _config())

    def testEvaluateBpdIndependentOfBatchSize(self):
        model = _config().build_model((4, 4, 3))
        images = _images(10)
        a = training.evaluate_bpd(model, images, batch_size=3)
        b = training.evaluate_bpd(model, images, batch_size=10)
        assert a == pytest.approx(b, rel=1e-6)


class TestCheckpoint():

    def testRoundTrip(self, tmp_path):
        model, _ = training.train_flow(_images(16), _config(epochs=1))
        path = str(tmp_path / 'flow.ckpt')
        checkpoint.save_flow(model, path)
        loaded = checkpoint.load_flow(path)
        assert loaded.architecture == model.architecture
        assert loaded.train_config == _config(epochs=1).to_dict()
        x = _images(4, seed=2)
        z, nu = flow_model.encode(model, x)
        z_loaded, nu_loaded = flow_model.encode(loaded, x)
        np.testing.assert_array_equal(z, z_loaded)
        np.testing.assert_array_equal(nu, nu_loaded)

    def testNotACheckpoint(self, tmp_path):
        path = tmp_path / 'flow.ckpt'
        path.write_bytes(b'not a checkpoint')
        with pytest.raises(errors.FormatError):
            checkpoint.load_flow(str(path))

    def testWrongKind(self, tmp_path):
        model = _config().build_model((4, 4, 3))
        path = str(tmp_path / 'flow.ckpt')
        checkpoints.save_checkpoint(path, 'classifier', {},
                                    model.state_dict())
        with pytest.raises(errors.FormatError, match='expected flow'):
            checkpoint.load_flow(path)

    def testMissingArchitecture(self, tmp_path):
        model = _config().build_model((4, 4, 3))
        path = str(tmp_path / 'flow.ckpt')
        checkpoints.save_checkpoint(path, checkpoint.KIND, {},
                                    model.state_dict())
        with pytest.raises(errors.FormatError,
                           match='invalid flow architecture'):
            checkpoint.load_flow(path)
