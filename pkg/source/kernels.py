#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Kernel functions for density (Gaussian) and distribution (Sigmoid) estimation together
with the rule-of-thumb bandwidth helper.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

SQRT_2PI = math.sqrt(2.0 * math.pi)


class KernelFamily(Enum):
    """
    Supported kernel function families
    """

    GAUSSIAN_PDF = "gaussian_pdf"
    SIGMOID_CDF = "sigmoid_cdf"


class Normalization(Enum):
    """
    PROPER_DENSITY applies the 1/h factor of a true density, UNSCALED averages the
    kernels without it.
    """

    PROPER_DENSITY = "proper"
    UNSCALED = "unscaled"

    @classmethod
    def _missing_(cls, value):
        # "paper" is the established name of the unscaled mode
        if value == "paper":
            return cls.UNSCALED
        return None


@dataclass(frozen=True)
class KernelSpec:
    """
    Kernel family, bandwidth h (sigma_kernel for the Gaussian family) and normalization.
    """

    family: KernelFamily = KernelFamily.GAUSSIAN_PDF
    bandwidth: float = 0.05
    normalization: Normalization = Normalization.PROPER_DENSITY

    def __post_init__(self):
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"Kernel bandwidth must be positive, got {self.bandwidth}.")


def gaussian(u: float) -> float:
    """
    Standard normal density.
    """
    return math.exp(-0.5 * u * u) / SQRT_2PI


def sigmoid(u: float) -> float:
    """
    Logistic function, split by sign so large |u| never overflows.
    """
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    exp_u = math.exp(u)
    return exp_u / (1.0 + exp_u)


def eval_kernel(spec: KernelSpec, u: float) -> float:
    """
    Evaluate the kernel function of the given family at the scaled distance u.
    :param spec: Kernel specification
    :param u: Scaled distance (x - x_i) / h
    :return: Kernel value
    """
    if not math.isfinite(u):
        raise ValueError(f"Kernel argument must be finite, got {u}.")
    if spec.family is KernelFamily.GAUSSIAN_PDF:
        return gaussian(u)
    return sigmoid(u)


def rule_of_thumb_bandwidth(samples: Sequence[float]) -> float:
    """
    Bandwidth h = 1.06 * sigma * N^(-1/5) with the sample standard deviation (N-1
    denominator). The detector never applies it on its own.
    :param samples: Observed samples
    :return: Bandwidth
    """
    values = np.asarray(samples, dtype=float)
    if values.size < 2:
        raise ValueError(
            f"Bandwidth needs at least 2 samples, got {values.size}. "
            f"Supply the bandwidth explicitly."
        )
    if np.ptp(values) == 0:
        raise ValueError("Samples are all equal, bandwidth is undefined.")
    sigma = float(np.std(values, ddof=1))
    return 1.06 * sigma * values.size ** (-0.2)
