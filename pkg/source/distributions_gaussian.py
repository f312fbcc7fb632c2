#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
This module contains the builders for the Gaussian ground-truth distributions.
"""


def setup(plugins, descriptor_class) -> None:
    """
    Configuration function to register the Gaussian distribution kinds in a collection.
    Each builder receives the parsed parameter groups and returns a descriptor.
    :param plugins: Collection of all possible distributions that have been registered.
    :param descriptor_class: Class of the returned descriptors
    :return: None
    """

    @plugins.register("gaussian")
    def builder(groups):  # pylint: disable=function-redefined
        if len(groups) != 1 or len(groups[0]) != 2:
            raise ValueError(
                f"A gaussian needs exactly 'mean,sigma', got {groups}."
            )
        mean, sigma = groups[0]
        return descriptor_class(kind="gaussian", components=((1.0, mean, sigma),))

    @plugins.register("mixture")
    def builder(groups):  # pylint: disable=function-redefined
        if len(groups) != 2 or any(len(group) != 3 for group in groups):
            raise ValueError(
                f"A mixture needs two components 'weight,mean,sigma', got {groups}."
            )
        return descriptor_class(
            kind="mixture", components=tuple(tuple(group) for group in groups)
        )
