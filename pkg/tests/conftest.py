import numpy as np
import pytest

from renyilp.ensembles import make_rng


@pytest.fixture
def rng():
    return make_rng(20240611)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: property suites with fixed sample counts")
