"""Shared pytest configuration.

Tests marked slow run the example experiments at full size and are skipped
unless pytest is given --runslow.
"""

import pytest


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run tests marked slow')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full-size experiment runs')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)
