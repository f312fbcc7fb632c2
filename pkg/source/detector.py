#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Streaming outlier detector: a FIFO window of the latest validated inliers, per-sample
likelihood, threshold decision and conditional window update.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from source.constants import (
    DEFAULT_N_IN,
    DEFAULT_P_THRES,
    DEFAULT_QUANTIZER_BITS,
    QUANTIZE_TOLERANCE,
)
from source.estimator import estimate_pdf
from source.kernels import KernelFamily, KernelSpec
from source.nonideality import (
    KernelPerturbation,
    PerturbationModel,
    add_noise,
    check_bits,
    dequantize,
    draw_kernel_perturbation,
    perturbed_pdf,
    quantize,
)

logger = logging.getLogger(__name__)


class WarmupPolicy(Enum):
    """
    Bootstrap policy of an empty window
    """

    ACCEPT_FIRST_N = "accept_first_n"


class Label(Enum):
    """
    Decision for one sample
    """

    INLIER = "inlier"
    OUTLIER = "outlier"
    WARMUP = "warmup"


@dataclass(frozen=True)
class DetectorConfig:  # pylint: disable=too-many-instance-attributes
    """
    All tunables of one detector instance.
    """

    n_in: int = DEFAULT_N_IN
    kernel: KernelSpec = field(default_factory=KernelSpec)
    p_thres: float = DEFAULT_P_THRES
    quantizer_bits: int = DEFAULT_QUANTIZER_BITS
    noise_sigma: float = 0.0
    perturbation: PerturbationModel = field(default_factory=PerturbationModel)
    warmup: WarmupPolicy = WarmupPolicy.ACCEPT_FIRST_N
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n_in, bool) or int(self.n_in) != self.n_in or self.n_in < 1:
            raise ValueError(f"n_in must be a positive integer, got {self.n_in}.")
        if not (math.isfinite(self.p_thres) and self.p_thres > 0):
            raise ValueError(f"p_thres must be positive, got {self.p_thres}.")
        check_bits(self.quantizer_bits)
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}.")
        if self.kernel.family is not KernelFamily.GAUSSIAN_PDF:
            raise ValueError("The detector needs the Gaussian kernel family.")


@dataclass(frozen=True)
class DetectionResult:
    """
    Outcome of one detector step.
    """

    index: int
    value: float
    likelihood: float
    label: Label


class WindowState:
    """
    Ring buffer of quantizer codes. Once full, every insert replaces the earliest
    arrived entry, which the cursor points at.
    """

    __slots__ = ("capacity", "codes", "insert_cursor")

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.codes: list[int] = []
        self.insert_cursor = 0

    def insert(self, code: int) -> None:
        if len(self.codes) < self.capacity:
            self.codes.append(code)
            return
        self.codes[self.insert_cursor] = code
        self.insert_cursor = (self.insert_cursor + 1) % self.capacity

    def values(self, bits: int) -> list[float]:
        """
        Dequantized window in buffer order.
        """
        return [dequantize(code, bits) for code in self.codes]

    def __len__(self):
        return len(self.codes)


@dataclass
class DetectorState:
    """
    Mutable state of one detector, single owner.
    """

    config: DetectorConfig
    window: WindowState
    rng: np.random.Generator
    step_count: int = 0
    kernel_parameters: KernelPerturbation | None = None


def detector_init(config: DetectorConfig) -> DetectorState:
    """
    Create an empty detector. Static kernel perturbations are drawn here, one per
    kernel slot.
    :param config: Detector configuration
    :return: Fresh state
    """
    if not isinstance(config, DetectorConfig):
        raise ValueError(f"Expected a DetectorConfig, got {type(config).__name__}.")
    state = DetectorState(
        config=config,
        window=WindowState(config.n_in),
        rng=np.random.default_rng(config.seed),
    )
    model = config.perturbation
    if not model.is_null and not model.resample_each_step:
        state.kernel_parameters = draw_kernel_perturbation(model, config.n_in, state.rng)
    return state


def _likelihood(state: DetectorState, x: float) -> float:
    config = state.config
    values = state.window.values(config.quantizer_bits)
    model = config.perturbation
    if model.is_null:
        return estimate_pdf(values, config.kernel, x)
    if model.resample_each_step:
        return perturbed_pdf(values, config.kernel, model, x, rng=state.rng)
    return perturbed_pdf(
        values, config.kernel, model, x, parameters=state.kernel_parameters
    )


def _checked_value(value: float) -> float:
    if not math.isfinite(value):
        raise ValueError(f"Sample value {value} is not finite.")
    if not -QUANTIZE_TOLERANCE <= value <= 1.0 + QUANTIZE_TOLERANCE:
        raise ValueError(f"Sample value {value} is outside the normalized range [0, 1].")
    return min(max(value, 0.0), 1.0)


def detector_step(state: DetectorState, value: float) -> DetectionResult:
    """
    Score one incoming sample and update the window when it is accepted. Stored samples
    are quantized, the incoming sample is used at full precision.
    :param state: Detector state, mutated
    :param value: Normalized sample
    :return: Decision for the sample
    """
    config = state.config
    sample = _checked_value(float(value))
    index = state.step_count
    if state.step_count < config.n_in:
        likelihood = _likelihood(state, sample) if len(state.window) else 0.0
        state.window.insert(quantize(sample, config.quantizer_bits))
        label = Label.WARMUP
    else:
        sample = add_noise(sample, config.noise_sigma, state.rng)
        likelihood = _likelihood(state, sample)
        if likelihood >= config.p_thres:
            label = Label.INLIER
            state.window.insert(quantize(sample, config.quantizer_bits))
        else:
            label = Label.OUTLIER
    state.step_count += 1
    return DetectionResult(index=index, value=float(value), likelihood=likelihood, label=label)


def run_series(config: DetectorConfig, series: Iterable[float]) -> list[DetectionResult]:
    """
    Fold detector_step over a series with a fresh detector.
    :param config: Detector configuration
    :param series: Normalized samples
    :return: One result per sample
    """
    state = detector_init(config)
    results = []
    for index, value in enumerate(series):
        try:
            results.append(detector_step(state, value))
        except ValueError as err:
            raise ValueError(f"Detection failed at index {index}: {err}") from err
    outliers = sum(1 for result in results if result.label is Label.OUTLIER)
    logger.debug("Series of %s samples scored, %s outliers.", len(results), outliers)
    return results
