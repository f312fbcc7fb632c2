#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Kernel density estimation over a sample window: point and grid evaluation of the PDF
and CDF, accuracy against analytic ground truth, the Monte-Carlo accuracy study over the
window length and the fixed-point reference pipeline (subtract, square, exponential LUT,
accumulate).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd
from scipy.special import expit

from source.constants import RMSE_GRID_POINTS
from source.distributions import DistributionDescriptor
from source.kernels import (
    KernelFamily,
    KernelSpec,
    Normalization,
    SQRT_2PI,
    eval_kernel,
)
from source.nonideality import (
    PerturbationModel,
    draw_kernel_perturbation,
    perturbed_pdf_grid,
)

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class DensityCurve:
    """
    Density values on a strictly increasing grid.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise ValueError(
                f"Grid and values differ in shape: {self.grid.shape} vs "
                f"{self.values.shape}."
            )
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("Grid must be strictly increasing.")
        if np.any(self.values < 0):
            raise ValueError("Density values must be non-negative.")

    def __len__(self):
        return self.grid.size

    def to_frame(self, value_name: str = "density") -> pd.DataFrame:
        """
        Table form with one row per grid point.
        """
        return pd.DataFrame({"x": self.grid, value_name: self.values})


@dataclass(frozen=True)
class FixedPointSpec:
    """
    Word widths of the digital pipeline: k-bit samples, LUT address and stored value width.
    """

    input_bits: int = 8
    lut_bits: int = 16
    lut_value_bits: int = 16

    def __post_init__(self):
        for name in ("input_bits", "lut_bits", "lut_value_bits"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}.")

    @property
    def max_code(self) -> int:
        return (1 << self.input_bits) - 1

    @property
    def lut_size(self) -> int:
        return 1 << self.lut_bits

    @property
    def lut_max(self) -> int:
        return (1 << self.lut_value_bits) - 1

    @property
    def address_shift(self) -> int:
        # top lut_bits of the 2k-bit square
        return max(0, 2 * self.input_bits - self.lut_bits)

    def address(self, square: int) -> int:
        """
        LUT address of a squared difference, saturating at the last address.
        """
        return min(square >> self.address_shift, self.lut_size - 1)

    def accumulator_bits(self, window_length: int) -> int:
        """
        Accumulator width which holds window_length full-scale LUT values.
        """
        return self.lut_value_bits + math.ceil(math.log2(max(window_length, 1)))


def _check_window(window: Sequence[float]) -> None:
    if len(window) == 0:
        raise ValueError("Window is empty, no density model exists yet.")


def estimate_pdf(window: Sequence[float], spec: KernelSpec, x: float) -> float:
    """
    KDE likelihood of x. Kernels are accumulated in window order.
    :param window: Kernel centers
    :param spec: Gaussian kernel specification
    :param x: Evaluation point
    :return: Density (PROPER_DENSITY) or kernel average (UNSCALED)
    """
    _check_window(window)
    if spec.family is not KernelFamily.GAUSSIAN_PDF:
        raise ValueError(f"PDF estimation needs the Gaussian kernel, got {spec.family}.")
    bandwidth = spec.bandwidth
    total = 0.0
    for center in window:
        total += eval_kernel(spec, (x - center) / bandwidth)
    if spec.normalization is Normalization.PROPER_DENSITY:
        return total / (len(window) * bandwidth)
    return total / len(window)


def estimate_pdf_grid(
    window: Sequence[float], spec: KernelSpec, grid: Sequence[float]
) -> DensityCurve:
    """
    Vectorized estimate_pdf over a grid. Values agree with the point function to
    floating-point rounding.
    :param window: Kernel centers
    :param spec: Gaussian kernel specification
    :param grid: Strictly increasing evaluation points
    :return: Estimated density curve
    """
    _check_window(window)
    if spec.family is not KernelFamily.GAUSSIAN_PDF:
        raise ValueError(f"PDF estimation needs the Gaussian kernel, got {spec.family}.")
    points = np.asarray(grid, dtype=float)
    centers = np.asarray(window, dtype=float)
    u = (points[:, None] - centers[None, :]) / spec.bandwidth
    values = (np.exp(-0.5 * u * u) / SQRT_2PI).sum(axis=1) / centers.size
    if spec.normalization is Normalization.PROPER_DENSITY:
        values = values / spec.bandwidth
    return DensityCurve(points, values)


def estimate_cdf(window: Sequence[float], spec: KernelSpec, x: float) -> float:
    """
    Sigmoid-kernel estimate of the cumulative distribution at x.
    :param window: Kernel centers
    :param spec: Sigmoid kernel specification
    :param x: Evaluation point
    :return: Value in (0, 1)
    """
    _check_window(window)
    if spec.family is not KernelFamily.SIGMOID_CDF:
        raise ValueError(f"CDF estimation needs the Sigmoid kernel, got {spec.family}.")
    total = 0.0
    for center in window:
        total += eval_kernel(spec, (x - center) / spec.bandwidth)
    return total / len(window)


def estimate_cdf_grid(
    window: Sequence[float], spec: KernelSpec, grid: Sequence[float]
) -> np.ndarray:
    """
    Vectorized estimate_cdf over a grid.
    """
    _check_window(window)
    if spec.family is not KernelFamily.SIGMOID_CDF:
        raise ValueError(f"CDF estimation needs the Sigmoid kernel, got {spec.family}.")
    u = (np.asarray(grid, dtype=float)[:, None] - np.asarray(window, dtype=float)) / (
        spec.bandwidth
    )
    return expit(u).mean(axis=1)


def avg_rmse(estimated: DensityCurve, truth: DensityCurve) -> float:
    """
    Root mean square error between two curves on the same grid.
    :param estimated: Learned density
    :param truth: Ground-truth density
    :return: RMSE
    """
    if estimated.grid.shape != truth.grid.shape or not np.array_equal(
        estimated.grid, truth.grid
    ):
        raise ValueError("Estimated and true curves use different grids.")
    if len(truth) == 0:
        raise ValueError("Curves are empty.")
    return float(np.sqrt(np.mean((estimated.values - truth.values) ** 2)))


def rmse_grid(points: int = RMSE_GRID_POINTS) -> np.ndarray:
    """
    Uniform evaluation grid over the normalized range [0, 1].
    """
    return np.linspace(0.0, 1.0, points)


@dataclass
class RmseStudyResult:
    """
    Per window length the mean, maximum and standard error of the per-trial RMSE, plus
    the learned curves of the first trial next to the truth.
    """

    table: pd.DataFrame
    curves: pd.DataFrame
    trial_rmse: dict[int, np.ndarray] = field(default_factory=dict)


def rmse_study(  # pylint: disable=too-many-arguments,too-many-locals
    true_dist: DistributionDescriptor,
    n_in_values: Sequence[int],
    trials: int,
    spec: KernelSpec,
    seed: int,
    perturbation: PerturbationModel | None = None,
    grid_points: int = RMSE_GRID_POINTS,
) -> RmseStudyResult:
    """
    Monte-Carlo accuracy of the learned density against the analytic truth for each
    window length. One private generator per call makes the study bit-reproducible.
    :param true_dist: Ground-truth distribution
    :param n_in_values: Window lengths to study
    :param trials: Monte-Carlo trials per window length
    :param spec: Gaussian kernel specification
    :param seed: Seed of the private generator
    :param perturbation: Optional kernel perturbation, drawn once per trial
    :param grid_points: Number of grid points over [0, 1]
    :return: Study result
    """
    if trials < 1:
        raise ValueError(f"Trials must be >= 1, got {trials}.")
    if not isinstance(true_dist, DistributionDescriptor):
        raise ValueError(f"Unsupported distribution descriptor: {true_dist!r}.")
    for n_in in n_in_values:
        if int(n_in) != n_in or n_in < 1:
            raise ValueError(f"Window lengths must be positive integers, got {n_in}.")
    rng = np.random.default_rng(seed)
    grid = rmse_grid(grid_points)
    truth = DensityCurve(grid, true_dist.pdf(grid))
    perturbed = perturbation is not None and not perturbation.is_null
    rows = []
    curves = {"x": grid, "truth": truth.values}
    trial_rmse = {}
    for n_in in n_in_values:
        errors = np.empty(trials)
        for trial in range(trials):
            samples = true_dist.sample(rng, int(n_in))
            if perturbed:
                parameters = draw_kernel_perturbation(perturbation, int(n_in), rng)
                learned = DensityCurve(
                    grid, perturbed_pdf_grid(samples, spec, parameters, grid)
                )
            else:
                learned = estimate_pdf_grid(samples, spec, grid)
            errors[trial] = avg_rmse(learned, truth)
            if trial == 0:
                curves[f"n_in_{n_in}"] = learned.values
        std_error = float(errors.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        rows.append(
            {
                "n_in": int(n_in),
                "mean_avg_rmse": float(errors.mean()),
                "max_avg_rmse": float(errors.max()),
                "std_error": std_error,
            }
        )
        trial_rmse[int(n_in)] = errors
        logger.debug("RMSE study n_in=%s mean=%.6g", n_in, errors.mean())
    return RmseStudyResult(
        table=pd.DataFrame(rows, columns=["n_in", "mean_avg_rmse", "max_avg_rmse", "std_error"]),
        curves=pd.DataFrame(curves),
        trial_rmse=trial_rmse,
    )


def rmse_sensitivity(  # pylint: disable=too-many-arguments
    true_dist: DistributionDescriptor,
    n_in: int,
    trials: int,
    spec: KernelSpec,
    seed: int,
    reference: PerturbationModel,
    varied: PerturbationModel,
    delta: float,
) -> float:
    """
    Change of the mean RMSE between a reference and a varied condition divided by the
    change of the condition parameter (e.g. degrees of temperature).
    """
    if delta == 0:
        raise ValueError("Condition change delta must be non-zero.")
    base = rmse_study(true_dist, [n_in], trials, spec, seed, reference)
    changed = rmse_study(true_dist, [n_in], trials, spec, seed, varied)
    return float(
        (changed.table["mean_avg_rmse"].iloc[0] - base.table["mean_avg_rmse"].iloc[0])
        / delta
    )


def build_exp_lut(fp: FixedPointSpec, sigma_code: float) -> list[int]:
    """
    Exponential LUT: entry j holds round(max * exp(-s_j / (2 sigma_code^2))) with s_j the
    smallest squared difference that maps to address j.
    :param fp: Word widths
    :param sigma_code: Kernel width in code units
    :return: LUT entries, non-increasing
    """
    if not (math.isfinite(sigma_code) and sigma_code > 0):
        raise ValueError(f"sigma_code must be positive, got {sigma_code}.")
    squares = np.arange(fp.lut_size, dtype=np.float64) * float(1 << fp.address_shift)
    entries = np.rint(fp.lut_max * np.exp(-squares / (2.0 * sigma_code * sigma_code)))
    return [int(entry) for entry in entries]


def fixed_point_pdf(
    window_codes: Sequence[int],
    sample_code: int,
    fp: FixedPointSpec,
    lut: Sequence[int],
) -> int:
    """
    Integer accumulation of LUT exponentials over the window, unnormalized.
    :param window_codes: Stored k-bit codes
    :param sample_code: Incoming k-bit code
    :param fp: Word widths
    :param lut: Table from build_exp_lut
    :return: Accumulated integer
    """
    if len(lut) != fp.lut_size:
        raise ValueError(f"LUT has {len(lut)} entries, expected {fp.lut_size}.")
    for code in (sample_code, *window_codes):
        if isinstance(code, bool) or int(code) != code or not 0 <= code <= fp.max_code:
            raise ValueError(f"Code {code} is outside [0, {fp.max_code}].")
    accumulator = 0
    for code in window_codes:
        difference = abs(int(sample_code) - int(code))
        accumulator += lut[fp.address(difference * difference)]
    return accumulator


def compare_fixed_point(
    window_codes: Sequence[int], fp: FixedPointSpec, sigma_code: float
) -> pd.DataFrame:
    """
    Scaled fixed-point estimate against the real-valued unnormalized estimate
    (1/N) sum exp(-d^2 / (2 sigma_code^2)) for every possible sample code.
    :param window_codes: Stored k-bit codes
    :param fp: Word widths
    :param sigma_code: Kernel width in code units
    :return: One row per sample code
    """
    _check_window(window_codes)
    lut = build_exp_lut(fp, sigma_code)
    scale = len(window_codes) * fp.lut_max
    codes = np.asarray(window_codes, dtype=float)
    rows = []
    for sample_code in range(fp.max_code + 1):
        accumulated = fixed_point_pdf(window_codes, sample_code, fp, lut)
        exact = float(
            np.mean(np.exp(-((sample_code - codes) ** 2) / (2.0 * sigma_code**2)))
        )
        scaled = accumulated / scale
        rows.append(
            {
                "sample_code": sample_code,
                "fixed_point": accumulated,
                "fixed_point_scaled": scaled,
                "real_unnormalized": exact,
                "abs_error": abs(scaled - exact),
            }
        )
    return pd.DataFrame(rows)
