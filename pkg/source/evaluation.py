#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Collection of evaluation functions: labeled series ingestion and normalization, scoring of
detection results, parameter sweeps over detector settings and synthetic labeled series.
"""
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from source.constants import (
    BENCHMARK_SERIES,
    DEFAULT_LABEL_COLUMN,
    DEFAULT_TIMESTAMP_COLUMN,
    DEFAULT_VALUE_COLUMN,
)
from source.detector import DetectionResult, DetectorConfig, Label, run_series
from source.distributions import DistributionDescriptor
from source.nonideality import PerturbationModel

logger = logging.getLogger(__name__)

SWEEP_AXES = (
    "p_thres",
    "sigma_kernel",
    "n_in",
    "quantizer_bits",
    "noise_sigma",
    "perturbation",
)


@dataclass(frozen=True)
class LabeledSeries:
    """
    Normalized values with anomaly labels and the raw range used for normalization.
    """

    name: str
    values: tuple[float, ...]
    labels: tuple[bool, ...]
    raw_min: float = 0.0
    raw_max: float = 1.0
    timestamps: tuple[str, ...] | None = None

    def __post_init__(self):
        if len(self.values) != len(self.labels):
            raise ValueError(
                f"Series {self.name} has {len(self.values)} values but "
                f"{len(self.labels)} labels."
            )
        if self.timestamps is not None and len(self.timestamps) != len(self.values):
            raise ValueError(f"Series {self.name} has a timestamp count mismatch.")
        if not self.raw_max > self.raw_min:
            raise ValueError(f"Series {self.name} has an empty raw range.")
        if any(not 0.0 <= value <= 1.0 for value in self.values):
            raise ValueError(f"Series {self.name} has values outside [0, 1].")

    @property
    def n_anomalies(self) -> int:
        return sum(self.labels)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Metrics:  # pylint: disable=too-many-instance-attributes
    """
    Counts and scores of one scored run. f1 is N_A / (N_A + 0.5 (F_N + F_P)),
    f1_standard the conventional 2TP / (2TP + F_P + F_N).
    """

    n_anomalies: int
    false_negatives: int
    false_positives: int
    true_positives: int
    true_negatives: int
    f1: float
    f1_standard: float
    f1_defined: bool

    def as_dict(self) -> dict:
        return {
            "n_anomalies": self.n_anomalies,
            "false_negatives": self.false_negatives,
            "false_positives": self.false_positives,
            "true_positives": self.true_positives,
            "true_negatives": self.true_negatives,
            "f1": self.f1,
            "f1_standard": self.f1_standard,
            "f1_defined": self.f1_defined,
        }


def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return float("nan")


def _data_line_numbers(path: Path) -> list[int]:
    # physical line of every data row, comment and blank lines are skipped by the reader
    with open(path, encoding="utf-8") as file:
        numbers = [
            number
            for number, line in enumerate(file, start=1)
            if line.split("#", 1)[0].strip()
        ]
    return numbers[1:]


def _row_error(path: Path, row: int, message: str) -> ValueError:
    numbers = _data_line_numbers(path)
    line = numbers[row] if row < len(numbers) else row + 2
    return ValueError(f"{path}: line {line}: {message}")


def load_series(
    path: str | Path,
    value_column: str = DEFAULT_VALUE_COLUMN,
    label_column: str = DEFAULT_LABEL_COLUMN,
    timestamp_column: str | None = DEFAULT_TIMESTAMP_COLUMN,
) -> LabeledSeries:
    """
    Read a comma-separated file with header and min-max normalize the value column with
    the series' own range. Lines starting with '#' are comments.
    :param path: File path
    :param value_column: Name of the numeric column
    :param label_column: Name of the 0/1 anomaly column
    :param timestamp_column: Optional timestamp column, kept as text when present
    :return: Normalized labeled series
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Series file {path} does not exist.")
    try:
        frame = pd.read_csv(
            path, comment="#", dtype=str, keep_default_na=False, skipinitialspace=True
        )
    except pd.errors.EmptyDataError as err:
        raise ValueError(f"{path}: file is empty.") from err
    for column in (value_column, label_column):
        if column not in frame.columns:
            raise ValueError(f"{path}: column '{column}' is missing.")
    if frame.empty:
        raise ValueError(f"{path}: file has no data rows.")
    raw = frame[value_column].map(_parse_float)
    bad_values = np.flatnonzero(~np.isfinite(raw.to_numpy(dtype=float)))
    if bad_values.size:
        row = int(bad_values[0])
        raise _row_error(path, row, f"value '{frame[value_column].iloc[row]}' is not numeric")
    labels = frame[label_column].str.strip().str.lower()
    label_map = {"0": False, "1": True, "false": False, "true": True}
    bad_labels = np.flatnonzero(~labels.isin(label_map).to_numpy())
    if bad_labels.size:
        row = int(bad_labels[0])
        raise _row_error(path, row, f"label '{frame[label_column].iloc[row]}' is not 0/1")
    raw_values = raw.to_numpy(dtype=float)
    raw_min, raw_max = float(raw_values.min()), float(raw_values.max())
    if not raw_max > raw_min:
        raise ValueError(f"{path}: value column is constant, cannot normalize.")
    normalized = (raw_values - raw_min) / (raw_max - raw_min)
    timestamps = None
    if timestamp_column and timestamp_column in frame.columns:
        timestamps = tuple(frame[timestamp_column].tolist())
    return LabeledSeries(
        name=path.stem,
        values=tuple(normalized.tolist()),
        labels=tuple(bool(label_map[label]) for label in labels),
        raw_min=raw_min,
        raw_max=raw_max,
        timestamps=timestamps,
    )


def series_frame(series: LabeledSeries) -> pd.DataFrame:
    """
    Table form of a series with the default column names.
    """
    columns = {}
    if series.timestamps is not None:
        columns[DEFAULT_TIMESTAMP_COLUMN] = list(series.timestamps)
    columns[DEFAULT_VALUE_COLUMN] = list(series.values)
    columns[DEFAULT_LABEL_COLUMN] = [int(label) for label in series.labels]
    return pd.DataFrame(columns)


def write_series(series: LabeledSeries, path: str | Path) -> Path:
    """
    Write the normalized representation so that load_series reads it back unchanged.
    :param series: Series to write
    :param path: Target file
    :return: Written path
    """
    path = Path(path)
    series_frame(series).to_csv(path, index=False, float_format="%.17g")
    return path


def results_frame(results: Sequence[DetectionResult]) -> pd.DataFrame:
    """
    One row per detection result: index, raw value, likelihood, label.
    """
    return pd.DataFrame(
        {
            "index": [result.index for result in results],
            "value": [result.value for result in results],
            "likelihood": [result.likelihood for result in results],
            "label": [result.label.value for result in results],
        }
    )


def score(
    results: Sequence[DetectionResult],
    labels: Sequence[bool],
    ignore_warmup: bool = True,
) -> Metrics:
    """
    Count missed anomalies and false alarms and compute both f1 variants. Anomalies during
    warmup are always missed. With ignore_warmup the warmup rows leave the true-negative
    count, otherwise they count as accepted samples.
    :param results: Detector results
    :param labels: True for anomalies
    :param ignore_warmup: Exclude warmup rows from the normal-row counts
    :return: Metrics
    """
    if len(results) != len(labels):
        raise ValueError(f"{len(results)} results but {len(labels)} labels.")
    n_anomalies = false_negatives = false_positives = true_negatives = 0
    for result, is_anomaly in zip(results, labels):
        flagged = result.label is Label.OUTLIER
        if is_anomaly:
            n_anomalies += 1
            if not flagged:
                false_negatives += 1
        elif flagged:
            false_positives += 1
        elif not (ignore_warmup and result.label is Label.WARMUP):
            true_negatives += 1
    true_positives = n_anomalies - false_negatives
    errors = false_negatives + false_positives
    f1_defined = n_anomalies > 0
    f1 = n_anomalies / (n_anomalies + 0.5 * errors) if f1_defined else 1.0
    standard_denominator = 2 * true_positives + errors
    f1_standard = (
        2 * true_positives / standard_denominator if standard_denominator else 1.0
    )
    return Metrics(
        n_anomalies=n_anomalies,
        false_negatives=false_negatives,
        false_positives=false_positives,
        true_positives=true_positives,
        true_negatives=true_negatives,
        f1=f1,
        f1_standard=f1_standard,
        f1_defined=f1_defined,
    )


def derive_seed(seed: int, cell_index: int, trial_index: int) -> int:
    """
    Seed of one sweep cell trial, independent of the execution order.
    """
    return int(np.random.SeedSequence([seed, cell_index, trial_index]).generate_state(1)[0])


def _cell_config(
    base: DetectorConfig, cell: dict, presets: dict[str, PerturbationModel]
) -> DetectorConfig:
    changes = {}
    for axis, value in cell.items():
        if axis == "sigma_kernel":
            changes["kernel"] = replace(base.kernel, bandwidth=float(value))
        elif axis == "perturbation":
            if value not in presets:
                raise ValueError(f"Unknown perturbation preset '{value}'.")
            changes["perturbation"] = presets[value]
        elif axis in ("n_in", "quantizer_bits"):
            changes[axis] = int(value)
        else:
            changes[axis] = float(value)
    return replace(base, **changes)


def _run_cell(task: tuple) -> dict:
    series, config, ignore_warmup, seeds = task
    metrics = [
        score(run_series(replace(config, seed=cell_seed), series.values), series.labels,
              ignore_warmup)
        for cell_seed in seeds
    ]
    return {
        "n_anomalies": series.n_anomalies,
        "mean_f1": float(np.mean([item.f1 for item in metrics])),
        "mean_f1_standard": float(np.mean([item.f1_standard for item in metrics])),
        "mean_false_negatives": float(np.mean([item.false_negatives for item in metrics])),
        "mean_false_positives": float(np.mean([item.false_positives for item in metrics])),
    }


def sweep(  # pylint: disable=too-many-arguments,too-many-locals
    series: LabeledSeries,
    base: DetectorConfig,
    axes: dict[str, Sequence],
    trials: int = 1,
    seed: int = 0,
    presets: dict[str, PerturbationModel] | None = None,
    base_preset: str = "none",
    ignore_warmup: bool = True,
    workers: int = 1,
) -> pd.DataFrame:
    """
    Score the detector on every cell of the Cartesian product of the axis values.
    :param series: Labeled series
    :param base: Configuration the axes modify
    :param axes: Axis name to list of values
    :param trials: Trials per cell, each with its own derived seed
    :param seed: Base seed
    :param presets: Named perturbation models for the perturbation axis
    :param base_preset: Preset name of the base perturbation, recorded when no
        perturbation axis is swept
    :param ignore_warmup: Passed to score
    :param workers: Worker processes, 1 runs in this process
    :return: One row per cell with all axis values and mean scores
    """
    unknown = sorted(set(axes) - set(SWEEP_AXES))
    if unknown:
        raise ValueError(f"Unknown sweep axes {unknown}. Known axes: {list(SWEEP_AXES)}.")
    if trials < 1:
        raise ValueError(f"Trials must be >= 1, got {trials}.")
    presets = presets or {"none": PerturbationModel()}
    names = list(axes)
    cells = [dict(zip(names, values)) for values in itertools.product(*axes.values())]
    tasks = [
        (
            series,
            _cell_config(base, cell, presets),
            ignore_warmup,
            [derive_seed(seed, cell_index, trial) for trial in range(trials)],
        )
        for cell_index, cell in enumerate(cells)
    ]
    logger.info("Sweep over %s cells x %s trials on %s.", len(cells), trials, series.name)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            scores = list(executor.map(_run_cell, tasks))
    else:
        scores = [_run_cell(task) for task in tasks]
    rows = []
    for cell, task, cell_score in zip(cells, tasks, scores):
        config = task[1]
        rows.append(
            {
                "series": series.name,
                "p_thres": config.p_thres,
                "sigma_kernel": config.kernel.bandwidth,
                "n_in": config.n_in,
                "quantizer_bits": config.quantizer_bits,
                "noise_sigma": config.noise_sigma,
                "perturbation": cell.get("perturbation", base_preset),
                "trials": trials,
                **cell_score,
            }
        )
    return pd.DataFrame(rows)


def best_cells(table: pd.DataFrame, by: str = "series") -> pd.DataFrame:
    """
    Row with the highest mean f1 per group, first one on ties.
    """
    best_index = table.groupby(by, sort=False)["mean_f1"].idxmax()
    return table.loc[best_index].reset_index(drop=True)


def synth_series(  # pylint: disable=too-many-arguments
    descriptor: DistributionDescriptor,
    length: int,
    anomaly_rate: float,
    anomaly_offset: float,
    seed: int,
    clean_prefix: int = 0,
    name: str = "synthetic",
) -> LabeledSeries:
    """
    Inliers drawn from the descriptor, anomalies placed where a uniform draw falls below
    the rate and shifted by +/- offset, everything clamped to [0, 1].
    :param descriptor: Inlier distribution
    :param length: Number of samples
    :param anomaly_rate: Probability of a sample to become an anomaly
    :param anomaly_offset: Shift of an anomaly
    :param seed: Seed of the private generator
    :param clean_prefix: Leading samples which are never anomalies
    :param name: Series name
    :return: Labeled series
    """
    if length < 1:
        raise ValueError(f"Length must be >= 1, got {length}.")
    if not 0 <= anomaly_rate < 1:
        raise ValueError(f"Anomaly rate must be in [0, 1), got {anomaly_rate}.")
    if not isinstance(descriptor, DistributionDescriptor):
        raise ValueError(f"Unsupported distribution descriptor: {descriptor!r}.")
    rng = np.random.default_rng(seed)
    values = descriptor.sample(rng, length)
    anomalies = rng.random(length) < anomaly_rate
    anomalies[: max(clean_prefix, 0)] = False
    signs = rng.choice(np.array([-1.0, 1.0]), size=length)
    values = np.clip(np.where(anomalies, values + signs * anomaly_offset, values), 0.0, 1.0)
    return LabeledSeries(
        name=name,
        values=tuple(values.tolist()),
        labels=tuple(bool(flag) for flag in anomalies),
    )


def match_benchmark_series(series: Sequence[LabeledSeries]) -> dict[str, int | None]:
    """
    Assign series to the reference series numbers by (anomaly count, length).
    :param series: Loaded series
    :return: Series name to reference number, None when unmatched
    """
    lookup = {counts: number for number, counts in BENCHMARK_SERIES.items()}
    mapping = {}
    for item in series:
        mapping[item.name] = lookup.get((item.n_anomalies, len(item)))
    return mapping
