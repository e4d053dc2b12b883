#
# SPDX-License-Identifier: GPL-2.0-only
#

import numpy as np
import pytest

from iwc.config import PipelineConfig
from iwc.signal_model import Signal, synth_benchmark


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the Monte-Carlo tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def fast_config(tmp_path):
    """Default pipeline with fewer k-means restarts."""
    return PipelineConfig(replicates=5, output_dir=str(tmp_path))


@pytest.fixture(scope="session")
def benchmark():
    return synth_benchmark(6000.0, 1.0)


def periodic_signal(fs, f0, duration, coeffs=(1.0, 0.5)):
    """Constant-rate sum of cosines with the given harmonic amplitudes."""
    t = np.arange(int(round(duration * fs))) / fs
    x = sum(c * np.cos(2 * np.pi * (k + 1) * f0 * t) for k, c in enumerate(coeffs))
    return Signal(x, fs)
