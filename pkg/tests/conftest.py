"""
Shared fixtures: a reduced radar geometry and backbone so most tests run in
seconds. Full-scale acceptance runs are marked ``slow`` and need --runslow.
"""
import logging

import pytest

from radarhead.config import RadarConfig
from radarhead.dataset import generate_dataset
from radarhead.logging_utils import LOGGER_NAME
from radarhead.siamese import BackboneSpec

# 12 frames x 32 bins keeps every class visible (the lowered head sits near bin 22).
TINY_RADAR = RadarConfig(frames_per_sample=12, used_bins=32)
TINY_COUNTS = (12, 12, 12, 12)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-scale acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-scale acceptance run (enable with --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def detach_log_handlers():
    """Handlers bound to a test's captured stdout must not outlive it."""
    yield
    logging.getLogger(LOGGER_NAME).handlers = []


@pytest.fixture(scope="session")
def tiny_radar():
    return TINY_RADAR


@pytest.fixture(scope="session")
def tiny_dataset():
    return generate_dataset(TINY_RADAR, TINY_COUNTS, seed=11)


@pytest.fixture(scope="session")
def tiny_spec():
    """Backbone for 12 x 32 matrices at a quarter of the standard width."""
    frames, bins = TINY_RADAR.matrix_shape
    return BackboneSpec.standard(
        input_shape=(bins, frames, 1),
        channel_scale=0.25,
        dense_units=(16, 8),
        dropout_rate=0.0,
    )
