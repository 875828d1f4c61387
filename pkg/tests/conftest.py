import numpy as np
import pytest

from switchid import SignalSpec, two_mode_benchmark


@pytest.fixture
def bench():
    """Two-mode family at rate 0.6 (so a = 0.27), with its mode law."""
    return two_mode_benchmark(0.6)


@pytest.fixture
def bench_signal():
    return SignalSpec(Ku_input=0.8, Ku_noise=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
