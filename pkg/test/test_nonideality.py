"""
Tests for nonideality.py
"""
import json

import numpy as np
import pytest

from source.constants import PERTURBATION_FACTOR_FLOOR
from source.estimator import estimate_pdf
from source.kernels import KernelSpec, Normalization
from source.nonideality import (
    KernelPerturbation,
    PerturbationModel,
    add_noise,
    dequantize,
    draw_kernel_perturbation,
    load_presets,
    perturbed_pdf,
    perturbed_pdf_grid,
    quantize,
)

PROPER = KernelSpec(bandwidth=0.05)
LITERAL = KernelSpec(bandwidth=0.05, normalization=Normalization.UNSCALED)


@pytest.mark.parametrize(
    "parameter_1, parameter_2, expected",
    [
        (0.0, 4, 0),
        (1.0, 4, 15),
        (0.5, 4, 8),
        (0.5, 1, 1),
        (0.49, 1, 0),
        (1.0, 16, 65535),
        (1.0 + 1e-12, 4, 15),
        (-1e-12, 4, 0),
    ],
)
def test_quantize(parameter_1, parameter_2, expected):
    """
    Pure test for function quantize()
    """
    assert quantize(parameter_1, parameter_2) == expected


@pytest.mark.parametrize(
    "parameter_1, parameter_2",
    [(1.1, 4), (-0.1, 4), (float("nan"), 4), (0.5, 0), (0.5, 17), (0.5, 2.5)],
)
def test_quantize_errors(parameter_1, parameter_2):
    """
    Out of range values and resolutions raise
    """
    with pytest.raises(ValueError):
        quantize(parameter_1, parameter_2)


@pytest.mark.parametrize("parameter_1", [1, 4, 8, 16])
def test_quantize_round_trip(parameter_1):
    """
    Round trip error stays within half a code step and the mapping is monotone
    """
    values = np.linspace(0.0, 1.0, 100_000)
    codes = [quantize(value, parameter_1) for value in values]
    restored = np.array([dequantize(code, parameter_1) for code in codes])
    assert np.max(np.abs(restored - values)) <= 1.0 / (2 * ((1 << parameter_1) - 1)) + 1e-15
    assert all(left <= right for left, right in zip(codes, codes[1:]))


def test_dequantize():
    """
    Pure test for function dequantize()
    """
    assert dequantize(8, 4) == pytest.approx(8 / 15)
    assert dequantize(0, 4) == 0.0
    assert dequantize(15, 4) == 1.0
    with pytest.raises(ValueError):
        dequantize(16, 4)
    with pytest.raises(ValueError):
        dequantize(-1, 4)


def test_add_noise():
    """
    Zero sigma consumes no draw, results are clamped and reproducible
    """
    rng = np.random.default_rng(1)
    state = rng.bit_generator.state
    assert add_noise(0.3, 0.0, rng) == 0.3
    assert rng.bit_generator.state == state
    first = [add_noise(0.5, 0.5, np.random.default_rng(4)) for _ in range(3)]
    assert first[0] == first[1] == first[2]
    noisy = [add_noise(value, 1.0, rng) for value in np.linspace(0, 1, 500)]
    assert all(0.0 <= value <= 1.0 for value in noisy)
    with pytest.raises(ValueError):
        add_noise(0.5, -0.1, rng)


def test_add_noise_spread():
    """
    Standard deviation of many draws at the center of the range matches sigma
    """
    rng = np.random.default_rng(8)
    draws = np.array([add_noise(0.5, 0.025, rng) for _ in range(100_000)])
    assert abs(float(np.std(draws)) - 0.025) < 0.001
    assert abs(float(np.mean(draws)) - 0.5) < 0.001


def test_perturbation_model_validation():
    """
    Negative deviations raise, zero model is null
    """
    assert PerturbationModel().is_null
    assert not PerturbationModel(width_scale_sigma=0.1).is_null
    with pytest.raises(ValueError):
        PerturbationModel(mu_offset_sigma=-0.01)


def test_draw_kernel_perturbation():
    """
    One draw per kernel, factors floored, draw order fixed
    """
    model = PerturbationModel(0.01, 5.0, 5.0)
    parameters = draw_kernel_perturbation(model, 200, np.random.default_rng(3))
    assert len(parameters.offsets) == len(parameters.widths) == len(parameters.amplitudes) == 200
    assert min(parameters.widths) >= PERTURBATION_FACTOR_FLOOR
    assert min(parameters.amplitudes) >= PERTURBATION_FACTOR_FLOOR
    assert PERTURBATION_FACTOR_FLOOR in parameters.widths
    rng = np.random.default_rng(3)
    offsets = rng.normal(0.0, 0.01, 200)
    assert parameters.offsets == tuple(offsets.tolist())


@pytest.mark.parametrize("parameter_1", [PROPER, LITERAL])
def test_perturbed_pdf_null_model_is_ideal(parameter_1):
    """
    Zero deviations reproduce the ideal estimate bit for bit
    """
    rng = np.random.default_rng(8)
    window = rng.uniform(0, 1, 12).tolist()
    for x in rng.uniform(0, 1, 50):
        assert perturbed_pdf(window, parameter_1, PerturbationModel(), x, rng=rng) == (
            estimate_pdf(window, parameter_1, x)
        )


def test_perturbed_pdf_known_parameters():
    """
    Shift, width and amplitude act on a single kernel as expected
    """
    parameters = KernelPerturbation(offsets=(0.01,), widths=(2.0,), amplitudes=(0.5,))
    model = PerturbationModel(0.01, 0.1, 0.1)
    at_shifted_center = perturbed_pdf([0.4], PROPER, model, 0.41, parameters=parameters)
    assert at_shifted_center == pytest.approx(0.5 * 7.9788456 / 2.0, abs=1e-7)
    literal = perturbed_pdf([0.4], LITERAL, model, 0.41, parameters=parameters)
    assert literal == pytest.approx(0.5 * 0.3989423, abs=1e-7)


def test_perturbed_pdf_errors():
    """
    Empty window, missing generator and too few draws raise
    """
    model = PerturbationModel(0.01, 0.1, 0.1)
    with pytest.raises(ValueError):
        perturbed_pdf([], PROPER, model, 0.4, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        perturbed_pdf([0.4], PROPER, model, 0.4)
    short = KernelPerturbation(offsets=(0.0,), widths=(1.0,), amplitudes=(1.0,))
    with pytest.raises(ValueError):
        perturbed_pdf([0.4, 0.5], PROPER, model, 0.4, parameters=short)


def test_perturbed_pdf_grid_matches_point():
    """
    Vectorized grid agrees with the point function
    """
    rng = np.random.default_rng(12)
    window = rng.uniform(0, 1, 9).tolist()
    model = PerturbationModel(0.02, 0.2, 0.2)
    parameters = draw_kernel_perturbation(model, 9, rng)
    grid = np.linspace(0, 1, 33)
    values = perturbed_pdf_grid(window, PROPER, parameters, grid)
    for x, value in zip(grid, values):
        assert value == pytest.approx(
            perturbed_pdf(window, PROPER, model, x, parameters=parameters), rel=1e-12, abs=1e-300
        )


def test_load_presets(tmp_path):
    """
    Shipped presets load, malformed ones raise, none is always present
    """
    presets = load_presets()
    assert presets["none"].is_null
    assert presets["temp_90c"].resample_each_step
    assert not presets["sigma_vth_15mv"].is_null
    path = tmp_path / "presets.json"
    path.write_text(json.dumps({"hot": {"mu_offset_sigma": 0.01}}), encoding="utf-8")
    assert set(load_presets(path)) == {"hot", "none"}
    path.write_text(json.dumps({"bad": {"offset": 0.01}}), encoding="utf-8")
    with pytest.raises(ValueError):
        load_presets(path)
