import tempfile

import pytest

import lpqlab


@pytest.fixture(scope='function')
def tempdir():
    with tempfile.TemporaryDirectory() as tmpd:
        yield tmpd


@pytest.fixture(scope='session')
def small_grid():
    return lpqlab.log_grid(1e-2, 1e2, 8)
