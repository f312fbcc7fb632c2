#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Command line and configuration file handling. Command line flags override values of the
configuration file, which override the documented defaults.
"""
import argparse
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from source import logging_helper as lh
from source.constants import (
    CONFIGURATION_FILE_PATH,
    DEFAULT_LABEL_COLUMN,
    DEFAULT_N_IN,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_P_THRES,
    DEFAULT_QUANTIZER_BITS,
    DEFAULT_SIGMA_KERNEL,
    DEFAULT_VALUE_COLUMN,
    OUTPUT_DIR_ENV,
    PRESETS_FILE_PATH,
)
from source.detector import DetectorConfig
from source.distributions import DistributionDescriptor, parse_descriptor
from source.estimator import FixedPointSpec
from source.evaluation import SWEEP_AXES
from source.kernels import KernelSpec, Normalization
from source.nonideality import PerturbationModel, load_presets

COMMANDS = ("detect", "sweep", "synth", "rmse-study", "digital-compare")
DEFAULTS = {
    "n_in": DEFAULT_N_IN,
    "sigma_kernel": DEFAULT_SIGMA_KERNEL,
    "p_thres": DEFAULT_P_THRES,
    "quantizer_bits": DEFAULT_QUANTIZER_BITS,
    "normalization": "proper",
    "noise_sigma": 0.0,
    "perturb_preset": "none",
    "seed": 0,
    "ignore_warmup": True,
}
DEFAULT_TRIALS = {"rmse-study": 100}
DEFAULT_DISTRIBUTION = "gaussian:0.4,0.05"
DEFAULT_N_IN_VALUES = (5, 10, 20, 50, 100)
configuration_failed_message_send = {"FileNotFoundError": False}


class ConfigError(ValueError):
    """
    Invalid command line or configuration value, reported as usage error.
    """


@dataclass
class RunConfig:  # pylint: disable=too-many-instance-attributes
    """
    Fully resolved settings of one run.
    """

    command: str
    detector: DetectorConfig
    perturb_preset: str = "none"
    inputs: tuple[Path, ...] = ()
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    axes: dict = field(default_factory=dict)
    trials: int = 1
    ignore_warmup: bool = True
    distribution: DistributionDescriptor | None = None
    fixed_point: FixedPointSpec = field(default_factory=FixedPointSpec)
    presets: dict = field(default_factory=dict)
    value_column: str = DEFAULT_VALUE_COLUMN
    label_column: str = DEFAULT_LABEL_COLUMN
    length: int = 1000
    anomaly_rate: float = 0.01
    anomaly_offset: float = 0.4
    n_in_values: tuple[int, ...] = DEFAULT_N_IN_VALUES
    workers: int = 1
    influx: bool = False

    def resolved(self) -> dict:
        """
        Plain form of every setting that influences the data outputs.
        """
        detector = self.detector
        return {
            "command": self.command,
            "n_in": detector.n_in,
            "sigma_kernel": detector.kernel.bandwidth,
            "normalization": detector.kernel.normalization.value,
            "p_thres": detector.p_thres,
            "quantizer_bits": detector.quantizer_bits,
            "noise_sigma": detector.noise_sigma,
            "perturb_preset": self.perturb_preset,
            "perturbation": _model_dict(detector.perturbation),
            "axis_presets": {
                name: _model_dict(self.presets[name])
                for name in self.axes.get("perturbation", ())
            },
            "value_column": self.value_column,
            "label_column": self.label_column,
            "seed": detector.seed,
            "trials": self.trials,
            "ignore_warmup": self.ignore_warmup,
            "inputs": [str(path) for path in self.inputs],
            "axes": {name: list(values) for name, values in self.axes.items()},
            "distribution": self.distribution.describe() if self.distribution else None,
            "fixed_point": {
                "input_bits": self.fixed_point.input_bits,
                "lut_bits": self.fixed_point.lut_bits,
                "lut_value_bits": self.fixed_point.lut_value_bits,
            },
            "length": self.length,
            "anomaly_rate": self.anomaly_rate,
            "anomaly_offset": self.anomaly_offset,
            "n_in_values": list(self.n_in_values),
        }


def _model_dict(model: PerturbationModel) -> dict:
    return {
        "mu_offset_sigma": model.mu_offset_sigma,
        "width_scale_sigma": model.width_scale_sigma,
        "amplitude_scale_sigma": model.amplitude_scale_sigma,
        "resample_each_step": model.resample_each_step,
    }


def build_parser() -> argparse.ArgumentParser:
    """
    Command line parser. Every option defaults to None so that unset flags fall back to
    the configuration file.
    """
    parser = argparse.ArgumentParser(
        prog="kdestreamguard",
        description="Sliding-window KDE outlier detection, sweeps and accuracy studies.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="JSON configuration file")
    parser.add_argument("--input", action="append", type=Path, help="input series file")
    parser.add_argument("--output-dir", type=Path)
    parser.add_argument("--n-in", type=int)
    parser.add_argument("--sigma-kernel", type=float)
    parser.add_argument("--p-thres", type=float)
    parser.add_argument("--bits", type=int, help="quantizer resolution of stored samples")
    parser.add_argument("--noise-sigma", type=float)
    parser.add_argument("--perturb-preset")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument(
        "--axis", action="append", default=[], help="sweep axis as name=v1,v2,..."
    )
    parser.add_argument("--normalization", choices=("proper", "paper", "unscaled"))
    parser.add_argument(
        "--ignore-warmup", action=argparse.BooleanOptionalAction, default=None
    )
    parser.add_argument("--value-column")
    parser.add_argument("--label-column")
    parser.add_argument("--distribution", help="e.g. gaussian:0.4,0.05")
    parser.add_argument("--length", type=int)
    parser.add_argument("--anomaly-rate", type=float)
    parser.add_argument("--anomaly-offset", type=float)
    parser.add_argument("--n-in-values", help="window lengths as v1,v2,...")
    parser.add_argument("--input-bits", type=int, help="k of the fixed-point pipeline")
    parser.add_argument("--lut-bits", type=int)
    parser.add_argument("--lut-value-bits", type=int)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument(
        "--influx", action="store_true", help="also write detections to InfluxDB"
    )
    return parser


def read_config_file(path: Path | None) -> dict:
    """
    Read the JSON configuration. A missing default file only logs a warning once, an
    explicitly requested file must exist.
    :param path: Requested file or None for the default file
    :return: Parsed configuration
    """
    explicit = path is not None
    path = path or CONFIGURATION_FILE_PATH
    try:
        with open(path, encoding="utf-8") as file:
            return json.load(file)
    except FileNotFoundError as err:
        if explicit:
            raise ConfigError(f"--config: file {path} does not exist.") from err
        if not configuration_failed_message_send["FileNotFoundError"]:
            lh.write_log(
                lh.LoggingLevel.WARNING.value,
                f"The configuration file could not be found, default values are used: {err}",
            )
            configuration_failed_message_send["FileNotFoundError"] = True
        return {}
    except json.JSONDecodeError as err:
        raise ConfigError(f"--config: file {path} is not valid JSON: {err}") from err


def _pick(flag_value, section: dict, key: str, default=None):
    if flag_value is not None:
        return flag_value
    if key in section:
        return section[key]
    return DEFAULTS.get(key, default)


def _parse_axis(text: str, presets: dict) -> tuple[str, list]:
    name, separator, value_text = text.partition("=")
    name = name.strip().replace("-", "_")
    if not separator or not value_text.strip():
        raise ConfigError(f"--axis: '{text}' is not of the form name=v1,v2,...")
    if name not in SWEEP_AXES:
        raise ConfigError(f"--axis: unknown axis '{name}', known: {list(SWEEP_AXES)}.")
    raw_values = [value.strip() for value in value_text.split(",") if value.strip()]
    if name == "perturbation":
        unknown = [value for value in raw_values if value not in presets]
        if unknown:
            raise ConfigError(f"--axis: unknown perturbation presets {unknown}.")
        return name, raw_values
    try:
        if name in ("n_in", "quantizer_bits"):
            return name, [int(value) for value in raw_values]
        return name, [float(value) for value in raw_values]
    except ValueError as err:
        raise ConfigError(f"--axis: values of '{name}' are not numbers: {err}") from err


def _parse_int_list(text: str, key: str) -> tuple[int, ...]:
    try:
        values = tuple(int(value) for value in text.split(",") if value.strip())
    except ValueError as err:
        raise ConfigError(f"{key}: '{text}' is not a list of integers.") from err
    if not values or any(value < 1 for value in values):
        raise ConfigError(f"{key}: window lengths must be positive integers.")
    return values


def _detector_config(args, section: dict, presets: dict) -> tuple[DetectorConfig, str]:
    preset_name = _pick(args.perturb_preset, section, "perturb_preset")
    if preset_name not in presets:
        raise ConfigError(
            f"--perturb-preset: unknown preset '{preset_name}', known: {sorted(presets)}."
        )
    flags = {
        "n_in": ("--n-in", args.n_in, int),
        "p_thres": ("--p-thres", args.p_thres, float),
        "quantizer_bits": ("--bits", args.bits, int),
        "noise_sigma": ("--noise-sigma", args.noise_sigma, float),
        "seed": ("--seed", args.seed, int),
    }
    values = {}
    for key, (flag, flag_value, convert) in flags.items():
        try:
            values[key] = convert(_pick(flag_value, section, key))
        except (TypeError, ValueError) as err:
            raise ConfigError(f"{flag}: {err}") from err
    try:
        kernel = KernelSpec(
            bandwidth=float(_pick(args.sigma_kernel, section, "sigma_kernel")),
            normalization=Normalization(_pick(args.normalization, section, "normalization")),
        )
    except ValueError as err:
        raise ConfigError(f"--sigma-kernel/--normalization: {err}") from err
    for key in ("n_in", "p_thres", "quantizer_bits", "noise_sigma"):
        try:
            DetectorConfig(**{key: values[key]})
        except ValueError as err:
            raise ConfigError(f"{flags[key][0]}: {err}") from err
    config = DetectorConfig(
        kernel=kernel, perturbation=presets[preset_name], **values
    )
    return config, preset_name


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:  # pylint: disable=too-many-locals,too-many-branches
    """
    Resolve the run configuration from the command line and the configuration file.
    Invalid values raise ConfigError naming the offending key; argparse itself exits
    with status 2 on unknown flags.
    :param argv: Argument list without the program name
    :return: Resolved configuration
    """
    args = build_parser().parse_args(argv)
    file_config = read_config_file(args.config)
    general = file_config.get("general", {})
    section = file_config.get("detector", {})
    try:
        presets = load_presets(PRESETS_FILE_PATH)
    except FileNotFoundError:
        presets = {"none": PerturbationModel()}
    for name, settings in file_config.get("perturbation_presets", {}).items():
        try:
            presets[name] = PerturbationModel(**settings)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"perturbation_presets.{name}: {err}") from err
    detector, preset_name = _detector_config(args, section, presets)

    inputs = tuple(args.input or ())
    for path in inputs:
        if not path.is_file():
            raise ConfigError(f"--input: file {path} does not exist.")
    if args.command in ("detect", "sweep") and not inputs:
        raise ConfigError(f"--input: command {args.command} needs at least one input file.")

    output_dir = args.output_dir or general.get("output_dir") or os.getenv(
        OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR
    )
    axes = dict(_parse_axis(text, presets) for text in args.axis)
    trials = args.trials if args.trials is not None else DEFAULT_TRIALS.get(args.command, 1)
    if trials < 1:
        raise ConfigError(f"--trials: must be >= 1, got {trials}.")
    if args.workers < 1:
        raise ConfigError(f"--workers: must be >= 1, got {args.workers}.")

    distribution = None
    if args.command in ("synth", "rmse-study"):
        try:
            distribution = parse_descriptor(args.distribution or DEFAULT_DISTRIBUTION)
        except ValueError as err:
            raise ConfigError(f"--distribution: {err}") from err

    try:
        fixed_point = FixedPointSpec(
            input_bits=args.input_bits if args.input_bits is not None else 8,
            lut_bits=args.lut_bits if args.lut_bits is not None else 16,
            lut_value_bits=args.lut_value_bits if args.lut_value_bits is not None else 16,
        )
    except ValueError as err:
        raise ConfigError(f"--input-bits/--lut-bits/--lut-value-bits: {err}") from err

    length = args.length if args.length is not None else 1000
    if length < 1:
        raise ConfigError(f"--length: must be >= 1, got {length}.")
    anomaly_rate = args.anomaly_rate if args.anomaly_rate is not None else 0.01
    if not 0 <= anomaly_rate < 1:
        raise ConfigError(f"--anomaly-rate: must be in [0, 1), got {anomaly_rate}.")
    n_in_values = (
        _parse_int_list(args.n_in_values, "--n-in-values")
        if args.n_in_values
        else DEFAULT_N_IN_VALUES
    )

    return RunConfig(
        command=args.command,
        detector=detector,
        perturb_preset=preset_name,
        inputs=inputs,
        output_dir=Path(output_dir),
        axes=axes,
        trials=trials,
        ignore_warmup=bool(_pick(args.ignore_warmup, section, "ignore_warmup")),
        distribution=distribution,
        fixed_point=fixed_point,
        presets=presets,
        value_column=args.value_column or section.get("value_column", DEFAULT_VALUE_COLUMN),
        label_column=args.label_column or section.get("label_column", DEFAULT_LABEL_COLUMN),
        length=length,
        anomaly_rate=anomaly_rate,
        anomaly_offset=args.anomaly_offset if args.anomaly_offset is not None else 0.4,
        n_in_values=n_in_values,
        workers=args.workers,
        influx=args.influx,
    )
