"""Tests for flowaug/determinism.py.

To run this test, navigate to this directory and run
```bash
$ pytest test_determinism.py
```
"""

import sys
sys.path.insert(0, '../..')  # Allow imports from flowaug codebase

import numpy as np
import torch

from flowaug import determinism


class TestDeterminism():

    def testSeedsTorchOnly(self):
        np.random.seed(5)
        numpy_state = np.random.get_state()[1].copy()
        determinism.configure_torch(3)
        a = torch.rand(4)
        determinism.configure_torch(3)
        b = torch.rand(4)
        assert torch.equal(a, b)
        assert torch.get_num_threads() == 1
        np.testing.assert_array_equal(np.random.get_state()[1], numpy_state)

    def testGeneratorIndependentOfGlobalState(self):
        a = torch.rand(3, generator=determinism.torch_generator(7))
        torch.manual_seed(0)
        torch.rand(10)
        b = torch.rand(3, generator=determinism.torch_generator(7))
        assert torch.equal(a, b)
