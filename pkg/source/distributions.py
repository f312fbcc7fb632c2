#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
This module contains all necessary functions and classes to integrate the plugin concept
for ground-truth distributions. Each registered builder turns a parameter list into a
distribution descriptor which can draw samples and evaluate its analytic density.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import norm

from source.distributions_gaussian import setup


@dataclass(frozen=True)
class DistributionDescriptor:
    """
    Gaussian mixture with components (weight, mean, standard deviation). A single
    component with weight 1 is the plain Gaussian case.
    """

    kind: str
    components: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError(f"Distribution {self.kind} has no components.")
        for weight, _, sigma in self.components:
            if weight <= 0 or sigma <= 0:
                raise ValueError(
                    f"Distribution {self.kind} needs positive weights and standard "
                    f"deviations, got weight={weight}, sigma={sigma}."
                )
        total = sum(weight for weight, _, _ in self.components)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(
                f"Weights of distribution {self.kind} must sum to 1, got {total}."
            )

    def pdf(self, grid: np.ndarray) -> np.ndarray:
        """
        Analytic density on the given points.
        :param grid: Evaluation points
        :return: Density values
        """
        points = np.asarray(grid, dtype=float)
        density = np.zeros_like(points)
        for weight, mean, sigma in self.components:
            density += weight * norm.pdf(points, loc=mean, scale=sigma)
        return density

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """
        Draw samples. The component index is drawn first for mixtures.
        :param rng: Generator owned by the caller
        :param size: Number of samples
        :return: Drawn samples
        """
        if len(self.components) == 1:
            _, mean, sigma = self.components[0]
            return rng.normal(mean, sigma, size)
        weights = np.array([component[0] for component in self.components])
        means = np.array([component[1] for component in self.components])
        sigmas = np.array([component[2] for component in self.components])
        chosen = rng.choice(len(self.components), size=size, p=weights)
        return rng.normal(means[chosen], sigmas[chosen])

    def describe(self) -> str:
        """
        Text form which parse_descriptor reads back.
        """
        parts = ";".join(
            ",".join(f"{number:g}" for number in component)
            for component in self.components
        )
        if self.kind == "gaussian":
            _, mean, sigma = self.components[0]
            parts = f"{mean:g},{sigma:g}"
        return f"{self.kind}:{parts}"


class Collection:
    """
    Collection class in which all registered distribution kinds are included and their
    respective builders.
    """

    def __init__(self):
        self.map = {}

    def register(self, name: str):
        """
        Registration function for the collection. This is called to register a
        distribution builder with a kind name.
        :param name: The name of the distribution kind as string
        :return: Decorator
        """

        def wrapper(func: Callable[[list[list[float]]], DistributionDescriptor]):
            self.map[name] = func
            return func

        return wrapper

    def __getitem__(self, key):
        return self.map[key]

    def __contains__(self, key):
        return key in self.map


plugins = Collection()
setup(plugins, DistributionDescriptor)

try:
    from files import distribution_plugin

    distribution_plugin.setup(plugins, DistributionDescriptor)
except ImportError as _:
    pass


def parse_descriptor(text: str) -> DistributionDescriptor:
    """
    Parse a descriptor of the form "<kind>:<a>,<b>;<c>,<d>,...", e.g.
    "gaussian:0.4,0.05" or "mixture:0.5,0.15,0.05;0.5,0.55,0.05".
    :param text: Descriptor text
    :return: The built descriptor
    """
    kind, _, parameter_text = text.partition(":")
    kind = kind.strip().lower()
    if kind not in plugins:
        raise ValueError(
            f"Unknown distribution kind '{kind}'. Registered: {sorted(plugins.map)}."
        )
    try:
        groups = [
            [float(number) for number in group.split(",")]
            for group in parameter_text.split(";")
            if group.strip()
        ]
    except ValueError as err:
        raise ValueError(f"Distribution parameters of '{text}' are not numbers.") from err
    return plugins[kind](groups)
