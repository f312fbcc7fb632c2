#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
The module includes all the builders to register any ground-truth distribution the user
wants to study with the rmse-study and synth commands.
"""


def setup(plugins, descriptor_class) -> None:
    """
    The configuration function for registering user distributions that are not
    yet available as generic kinds. Every builder receives the parameter groups of the
    descriptor text (groups split by ';', numbers by ',') and returns a descriptor.
    :param plugins: Collection of all possible distributions that have been registered.
    :param descriptor_class: Class of the returned descriptors
    :return: None

    Check implemented kinds in source/distributions_gaussian.py as example
    """

    @plugins.register("bimodal")
    def builder(groups):  # pylint: disable=function-redefined
        # "bimodal:0.15,0.55,0.05" -> equal-weight mixture of two Gaussians with
        # a shared standard deviation
        if len(groups) != 1 or len(groups[0]) != 3:
            raise ValueError(f"A bimodal needs 'mean_a,mean_b,sigma', got {groups}.")
        mean_a, mean_b, sigma = groups[0]
        return descriptor_class(
            kind="mixture",
            components=((0.5, mean_a, sigma), (0.5, mean_b, sigma)),
        )
