"""
File provides test structures and test data
"""
import numpy as np
import pytest

from source import logging_helper as lh
from source.distributions import parse_descriptor
from source.evaluation import LabeledSeries, synth_series, write_series


def data_for_random_windows(count: int = 100, seed: int = 2024):
    """
    Generated windows of size 1 to 32 with bandwidths in [0.01, 0.2]
    :return: List of (window, bandwidth)
    """
    rng = np.random.default_rng(seed)
    test_data = []
    for _ in range(count):
        size = int(rng.integers(1, 33))
        window = rng.uniform(0.0, 1.0, size).tolist()
        bandwidth = float(rng.uniform(0.01, 0.2))
        test_data.append((window, bandwidth))
    return test_data


def data_for_random_series(count: int, seed: int, max_length: int = 500):
    """
    Generated normalized series: a noisy level with occasional jumps and spikes.
    :return: List of value lists
    """
    rng = np.random.default_rng(seed)
    test_data = []
    for _ in range(count):
        length = int(rng.integers(0, max_length + 1))
        level = rng.uniform(0.2, 0.8)
        values = level + rng.normal(0.0, rng.uniform(0.01, 0.1), length)
        spikes = rng.random(length) < 0.03
        values[spikes] += rng.choice([-0.4, 0.4], size=int(spikes.sum()))
        test_data.append(np.clip(values, 0.0, 1.0).tolist())
    return test_data


@pytest.fixture(name="gaussian_series")
def fixture_gaussian_series() -> LabeledSeries:
    """
    Synthetic N(0.4, 0.05) series with 1% anomalies at offset 0.4 and a clean warmup.
    """
    return synth_series(
        parse_descriptor("gaussian:0.4,0.05"),
        length=1000,
        anomaly_rate=0.01,
        anomaly_offset=0.4,
        seed=7,
        clean_prefix=10,
    )


@pytest.fixture(name="series_file")
def fixture_series_file(tmp_path, gaussian_series):
    """
    The synthetic series written as CSV.
    """
    return write_series(gaussian_series, tmp_path / "gaussian.csv")


@pytest.fixture(autouse=True)
def fixture_quiet_logging(monkeypatch):
    """
    Keep the application log file untouched during tests.
    """
    original = lh.configure_logging
    monkeypatch.setattr(
        lh, "configure_logging", lambda level=None, log_file=None: original(level, None)
    )
