#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Software models of the hardware imperfections of the analog density learner:
k-bit quantization of stored samples, additive Gaussian noise on the incoming sample and
per-kernel perturbation of center, width and amplitude (process and temperature variation).
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from source.constants import (
    MAX_QUANTIZER_BITS,
    MIN_QUANTIZER_BITS,
    PERTURBATION_FACTOR_FLOOR,
    PRESETS_FILE_PATH,
    QUANTIZE_TOLERANCE,
)
from source.kernels import KernelSpec, Normalization, SQRT_2PI


@dataclass(frozen=True)
class PerturbationModel:
    """
    Standard deviations of the per-kernel center shift and of the multiplicative width
    and amplitude factors. With resample_each_step the draws are renewed every step,
    otherwise they are fixed per detector instance.
    """

    mu_offset_sigma: float = 0.0
    width_scale_sigma: float = 0.0
    amplitude_scale_sigma: float = 0.0
    resample_each_step: bool = False

    def __post_init__(self):
        for name in ("mu_offset_sigma", "width_scale_sigma", "amplitude_scale_sigma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"Perturbation {name} must be >= 0, got {value}.")

    @property
    def is_null(self) -> bool:
        """
        True if the model leaves every kernel untouched.
        """
        return (
            self.mu_offset_sigma == 0
            and self.width_scale_sigma == 0
            and self.amplitude_scale_sigma == 0
        )


@dataclass(frozen=True)
class KernelPerturbation:
    """
    Drawn parameters, one entry per kernel slot.
    """

    offsets: tuple[float, ...]
    widths: tuple[float, ...]
    amplitudes: tuple[float, ...]


def check_bits(bits: int) -> int:
    """
    Check the quantizer resolution.
    :param bits: Resolution in bits
    :return: The checked resolution
    """
    if isinstance(bits, bool) or int(bits) != bits:
        raise ValueError(f"Quantizer bits must be an integer, got {bits}.")
    if not MIN_QUANTIZER_BITS <= bits <= MAX_QUANTIZER_BITS:
        raise ValueError(
            f"Quantizer bits must be in [{MIN_QUANTIZER_BITS}, {MAX_QUANTIZER_BITS}], "
            f"got {bits}."
        )
    return int(bits)


def quantize(value: float, bits: int) -> int:
    """
    Map a normalized value to its DAC code, round half away from zero.
    :param value: Value in [0, 1]
    :param bits: Resolution in bits
    :return: Code in [0, 2^bits - 1]
    """
    bits = check_bits(bits)
    if not math.isfinite(value) or not (
        -QUANTIZE_TOLERANCE <= value <= 1.0 + QUANTIZE_TOLERANCE
    ):
        raise ValueError(f"Value {value} is outside [0, 1] and cannot be quantized.")
    clamped = min(max(value, 0.0), 1.0)
    return int(math.floor(clamped * ((1 << bits) - 1) + 0.5))


def dequantize(code: int, bits: int) -> float:
    """
    Map a DAC code back to the normalized range.
    :param code: Code in [0, 2^bits - 1]
    :param bits: Resolution in bits
    :return: Value in [0, 1]
    """
    bits = check_bits(bits)
    top = (1 << bits) - 1
    if not 0 <= code <= top:
        raise ValueError(f"Code {code} is outside [0, {top}] for {bits} bits.")
    return code / top


def add_noise(value: float, sigma: float, rng: np.random.Generator) -> float:
    """
    Add a Gaussian noise draw and clamp to [0, 1]. Sigma 0 consumes no draw.
    :param value: Clean value
    :param sigma: Noise standard deviation
    :param rng: Generator owned by the caller
    :return: Noisy value
    """
    if sigma < 0:
        raise ValueError(f"Noise sigma must be >= 0, got {sigma}.")
    if sigma == 0:
        return value
    return min(max(value + float(rng.normal(0.0, sigma)), 0.0), 1.0)


def draw_kernel_perturbation(
    model: PerturbationModel, count: int, rng: np.random.Generator
) -> KernelPerturbation:
    """
    Draw offsets, then widths, then amplitudes, each as one vector of length count.
    Width and amplitude factors are floored at PERTURBATION_FACTOR_FLOOR.
    :param model: Perturbation model
    :param count: Number of kernels
    :param rng: Generator owned by the caller
    :return: Drawn parameters
    """
    offsets = rng.normal(0.0, model.mu_offset_sigma, count)
    widths = np.maximum(
        rng.normal(1.0, model.width_scale_sigma, count), PERTURBATION_FACTOR_FLOOR
    )
    amplitudes = np.maximum(
        rng.normal(1.0, model.amplitude_scale_sigma, count), PERTURBATION_FACTOR_FLOOR
    )
    return KernelPerturbation(
        offsets=tuple(offsets.tolist()),
        widths=tuple(widths.tolist()),
        amplitudes=tuple(amplitudes.tolist()),
    )


def perturbed_pdf(
    window_values: Sequence[float],
    spec: KernelSpec,
    model: PerturbationModel,
    x: float,
    rng: np.random.Generator | None = None,
    parameters: KernelPerturbation | None = None,
) -> float:
    """
    Density at x with every kernel shifted, widened and scaled by its drawn parameters.
    Kernels are summed in window order; with unit factors and zero offsets the result is
    bit-identical to the ideal estimate.
    :param window_values: Kernel centers
    :param spec: Kernel specification
    :param model: Perturbation model, used when parameters must be drawn
    :param x: Evaluation point
    :param rng: Generator used when parameters is None
    :param parameters: Already drawn parameters, at least one entry per kernel
    :return: Perturbed density
    """
    count = len(window_values)
    if count == 0:
        raise ValueError("Window is empty, no density model exists yet.")
    if parameters is None:
        if rng is None:
            raise ValueError("A generator is needed to draw kernel perturbations.")
        parameters = draw_kernel_perturbation(model, count, rng)
    if len(parameters.offsets) < count:
        raise ValueError(
            f"{len(parameters.offsets)} perturbation draws for {count} kernels."
        )
    bandwidth = spec.bandwidth
    proper = spec.normalization is Normalization.PROPER_DENSITY
    total = 0.0
    for center, offset, width, amplitude in zip(
        window_values, parameters.offsets, parameters.widths, parameters.amplitudes
    ):
        u = (x - center - offset) / (bandwidth * width)
        term = amplitude * (math.exp(-0.5 * u * u) / SQRT_2PI)
        total += term / width if proper else term
    if proper:
        return total / (count * bandwidth)
    return total / count


def perturbed_pdf_grid(
    window_values: Sequence[float],
    spec: KernelSpec,
    parameters: KernelPerturbation,
    grid: np.ndarray,
) -> np.ndarray:
    """
    Vectorized perturbed density on a grid for density studies.
    """
    centers = np.asarray(window_values, dtype=float)
    count = centers.size
    offsets = np.asarray(parameters.offsets[:count])
    widths = np.asarray(parameters.widths[:count])
    amplitudes = np.asarray(parameters.amplitudes[:count])
    scaled = spec.bandwidth * widths
    u = (np.asarray(grid, dtype=float)[:, None] - centers - offsets) / scaled
    terms = amplitudes * np.exp(-0.5 * u * u) / SQRT_2PI
    if spec.normalization is Normalization.PROPER_DENSITY:
        return (terms / widths).sum(axis=1) / (count * spec.bandwidth)
    return terms.sum(axis=1) / count


def load_presets(path: Path = PRESETS_FILE_PATH) -> dict[str, PerturbationModel]:
    """
    Read the named perturbation bundles. The values are chosen to degrade detection
    comparably to the published variation studies and carry no claim of circuit fidelity.
    :param path: JSON file with one object per preset
    :return: Preset name to model
    """
    with open(path, encoding="utf-8") as file:
        data = json.load(file)
    presets = {}
    for name, settings in data.items():
        try:
            presets[name] = PerturbationModel(**settings)
        except TypeError as err:
            raise ValueError(f"Perturbation preset '{name}' is malformed: {err}") from err
    presets.setdefault("none", PerturbationModel())
    return presets
