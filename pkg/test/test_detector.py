"""
Tests for detector.py
"""
import copy
import math

import numpy as np
import pytest

from conftest import data_for_random_series
from source.detector import (
    DetectorConfig,
    Label,
    WindowState,
    detector_init,
    detector_step,
    run_series,
)
from source.kernels import KernelFamily, KernelSpec, Normalization, SQRT_2PI
from source.nonideality import PerturbationModel, dequantize, quantize


def naive_run(config: DetectorConfig, series) -> list[tuple[float, Label]]:
    """
    Reference detector which recomputes every likelihood from scratch over its own FIFO
    list of accepted codes.
    """
    bits = config.quantizer_bits
    bandwidth = config.kernel.bandwidth
    proper = config.kernel.normalization is Normalization.PROPER_DENSITY
    slots: list[int] = []
    oldest = 0
    output = []
    for index, value in enumerate(series):
        if slots:
            total = 0.0
            for code in slots:
                u = (value - dequantize(code, bits)) / bandwidth
                total += math.exp(-0.5 * u * u) / SQRT_2PI
            likelihood = total / (len(slots) * bandwidth) if proper else total / len(slots)
        else:
            likelihood = 0.0
        if index < config.n_in:
            label = Label.WARMUP
        elif likelihood >= config.p_thres:
            label = Label.INLIER
        else:
            label = Label.OUTLIER
        if label is not Label.OUTLIER:
            code = quantize(value, bits)
            if len(slots) < config.n_in:
                slots.append(code)
            else:
                slots[oldest] = code
                oldest = (oldest + 1) % config.n_in
        output.append((likelihood, label))
    return output


def random_config(rng: np.random.Generator) -> DetectorConfig:
    normalization = (
        Normalization.PROPER_DENSITY if rng.random() < 0.5 else Normalization.UNSCALED
    )
    return DetectorConfig(
        n_in=int(rng.integers(1, 21)),
        kernel=KernelSpec(bandwidth=float(rng.uniform(0.01, 0.2)), normalization=normalization),
        p_thres=float(10 ** rng.uniform(-6, 0.5)),
        quantizer_bits=int(rng.integers(1, 17)),
        seed=int(rng.integers(0, 2**31)),
    )


def test_run_series_matches_naive_reference():
    """
    Streaming detector is bitwise equal to the recompute-from-scratch reference
    """
    rng = np.random.default_rng(99)
    for series in data_for_random_series(1000, seed=98):
        config = random_config(rng)
        results = run_series(config, series)
        reference = naive_run(config, series)
        assert [(result.likelihood, result.label) for result in results] == reference
        assert [result.index for result in results] == list(range(len(series)))


def test_run_series_empty():
    """
    Empty input gives empty output
    """
    assert not run_series(DetectorConfig(), [])


def test_warmup_and_threshold_equality():
    """
    First n_in samples are warmup, likelihood equal to the threshold is an inlier
    """
    config = DetectorConfig(n_in=2, p_thres=1e-4)
    state = detector_init(config)
    first = detector_step(state, 0.4)
    assert first.label is Label.WARMUP and first.likelihood == 0.0
    assert detector_step(state, 0.9).label is Label.WARMUP
    probe = copy.deepcopy(state)
    value = 0.4
    likelihood = detector_step(probe, value).likelihood
    exact = DetectorConfig(n_in=2, p_thres=likelihood)
    exact_state = detector_init(exact)
    detector_step(exact_state, 0.4)
    detector_step(exact_state, 0.9)
    assert detector_step(exact_state, value).label is Label.INLIER


def test_outlier_leaves_window_unchanged():
    """
    Rejected samples never change the window
    """
    config = DetectorConfig(n_in=3)
    state = detector_init(config)
    for value in (0.4, 0.42, 0.38):
        detector_step(state, value)
    before = (list(state.window.codes), state.window.insert_cursor)
    result = detector_step(state, 1.0)
    assert result.label is Label.OUTLIER
    assert (list(state.window.codes), state.window.insert_cursor) == before


def test_window_fifo_order():
    """
    Insert replaces the earliest arrived code once full
    """
    window = WindowState(3)
    for code in (1, 2, 3, 4, 5):
        window.insert(code)
    assert window.codes == [4, 5, 3]
    assert window.insert_cursor == 2
    window.insert(6)
    assert window.codes == [4, 5, 6]
    assert len(window) == 3


def test_stored_window_is_quantized():
    """
    Window uses dequantized codes while the incoming sample stays at full precision
    """
    config = DetectorConfig(n_in=1, quantizer_bits=4)
    state = detector_init(config)
    detector_step(state, 0.5)
    assert state.window.codes == [8]
    result = detector_step(state, 8 / 15)
    assert result.likelihood == pytest.approx(7.9788456, abs=1e-7)


@pytest.mark.parametrize("parameter_1", [1e-8, 1e-4, 1e-2, 1.0, 5.0])
def test_decision_monotone_in_threshold(parameter_1):
    """
    Inlier at a threshold stays inlier at every lower threshold from the same state
    """
    rng = np.random.default_rng(5)
    config = DetectorConfig(n_in=5, p_thres=parameter_1)
    state = detector_init(config)
    for value in rng.normal(0.4, 0.05, 5).clip(0, 1):
        detector_step(state, value)
    for value in rng.uniform(0, 1, 100):
        probe = copy.deepcopy(state)
        result = detector_step(probe, value)
        if result.label is Label.INLIER:
            for lower in (parameter_1 / 10, parameter_1 / 1000):
                lowered = copy.deepcopy(state)
                lowered.config = DetectorConfig(n_in=5, p_thres=lower)
                assert detector_step(lowered, value).label is Label.INLIER


def test_step_on_snapshot_equals_original():
    """
    Stepping a deep copy gives the same result as stepping the original
    """
    config = DetectorConfig(
        n_in=4, noise_sigma=0.02, perturbation=PerturbationModel(0.01, 0.1, 0.1, True)
    )
    state = detector_init(config)
    for value in (0.4, 0.45, 0.41, 0.39, 0.43):
        detector_step(state, value)
    snapshot = copy.deepcopy(state)
    assert detector_step(snapshot, 0.42) == detector_step(state, 0.42)


def test_null_pipeline_is_ideal():
    """
    Zero noise and a zero perturbation model reproduce the ideal likelihoods
    """
    series = data_for_random_series(5, seed=31)[0]
    ideal = run_series(DetectorConfig(), series)
    null = run_series(DetectorConfig(noise_sigma=0.0, perturbation=PerturbationModel()), series)
    assert ideal == null


@pytest.mark.parametrize("parameter_1", [False, True])
def test_perturbed_runs_reproducible(parameter_1):
    """
    Same seed gives the same results with static and resampled perturbations
    """
    series = data_for_random_series(3, seed=12)[1]
    config = DetectorConfig(
        noise_sigma=0.01,
        perturbation=PerturbationModel(0.01, 0.1, 0.1, parameter_1),
        seed=77,
    )
    assert run_series(config, series) == run_series(config, series)


def test_static_perturbation_drawn_once():
    """
    Static draws are fixed at init, one per kernel slot
    """
    config = DetectorConfig(n_in=6, perturbation=PerturbationModel(0.01, 0.1, 0.1))
    state = detector_init(config)
    assert len(state.kernel_parameters.offsets) == 6
    assert detector_init(DetectorConfig()).kernel_parameters is None


@pytest.mark.parametrize("parameter_1", [float("nan"), 1.5, -0.2])
def test_run_series_rejects_bad_samples(parameter_1):
    """
    Corrupted or unnormalized input raises with the failing index
    """
    with pytest.raises(ValueError, match="index 2"):
        run_series(DetectorConfig(), [0.4, 0.4, parameter_1])


@pytest.mark.parametrize(
    "parameter_1",
    [
        {"n_in": 0},
        {"p_thres": 0.0},
        {"quantizer_bits": 17},
        {"noise_sigma": -1.0},
        {"kernel": KernelSpec(family=KernelFamily.SIGMOID_CDF)},
    ],
)
def test_detector_config_validation(parameter_1):
    """
    Invalid configuration raises
    """
    with pytest.raises(ValueError):
        DetectorConfig(**parameter_1)
