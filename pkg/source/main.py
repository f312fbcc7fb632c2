#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Main function of the command line front end. Runs detection, sweeps, synthetic series
generation, density accuracy studies and the fixed-point comparison, and writes tables and
a report per run.
"""
import sys
from typing import Sequence

import numpy as np
import pandas as pd

from source import logging_helper as lh
from source import support_functions as sf
from source.detector import run_series
from source.estimator import compare_fixed_point, rmse_study
from source.evaluation import (
    best_cells,
    load_series,
    match_benchmark_series,
    results_frame,
    score,
    series_frame,
    sweep,
    synth_series,
)
from source.run_config import ConfigError, RunConfig, parse_config

EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_USAGE_ERROR = 2
FIXED_POINT_ERROR_BOUND = 2.0**-6


def _load_inputs(config: RunConfig) -> list:
    """
    Load every input series. All inputs are tried before the run fails, so one run
    reports every unreadable file.
    """
    series_list = []
    failed = []
    watch_hen = lh.WatchHen(unit_name="input series")
    for path in config.inputs:
        try:
            series_list.append(
                load_series(path, config.value_column, config.label_column)
            )
            watch_hen.normal_processing()
        except (ValueError, FileNotFoundError) as err:
            watch_hen.failure_processing(
                type(err).__name__, err, f"{path} could not be loaded"
            )
            failed.append(str(path))
    if failed:
        raise ValueError(
            f"{len(failed)} of {len(config.inputs)} input series could not be loaded: "
            f"{', '.join(failed)}"
        )
    return series_list


def run_detect(config: RunConfig, writer: sf.OutputWriter) -> dict:
    """
    Score every input series and write per-sample results and a summary.
    :param config: Resolved configuration
    :param writer: Output writer of the run
    :return: Report content
    """
    series_list = _load_inputs(config)
    login_information = None
    db_watch_hen = lh.WatchHen(unit_name="database writer")
    if config.influx:
        login_information = sf.DataApp.from_env()
        if not sf.check_and_verify_db_connection(login_information):
            raise RuntimeError("InfluxDB export requested but the database is not usable.")
    summary = []
    not_exported = []
    for series in series_list:
        results = run_series(config.detector, series.values)
        metrics = score(results, series.labels, config.ignore_warmup)
        writer.write_table(f"{series.name}_detections.csv", results_frame(results))
        summary.append({"series": series.name, **metrics.as_dict()})
        if login_information is not None and not sf.write_detection_points(
            login_information, series, results, db_watch_hen
        ):
            not_exported.append(series.name)
        lh.write_log(
            lh.LoggingLevel.INFO.value,
            f"{series.name}: f1={metrics.f1:.4f} FN={metrics.false_negatives} "
            f"FP={metrics.false_positives} anomalies={metrics.n_anomalies}",
        )
    if not_exported:
        raise RuntimeError(
            f"Detections of {', '.join(not_exported)} could not be exported."
        )
    writer.write_table("detect_summary.csv", pd.DataFrame(summary))
    return {
        "metrics": summary,
        "benchmark_mapping": match_benchmark_series(series_list),
    }


def run_sweep(config: RunConfig, writer: sf.OutputWriter) -> dict:
    """
    Sweep the configured axes on every input series.
    """
    series_list = _load_inputs(config)
    tables = [
        sweep(
            series,
            config.detector,
            config.axes,
            trials=config.trials,
            seed=config.detector.seed,
            presets=config.presets,
            base_preset=config.perturb_preset,
            ignore_warmup=config.ignore_warmup,
            workers=config.workers,
        )
        for series in series_list
    ]
    table = pd.concat(tables, ignore_index=True)
    best = best_cells(table)
    writer.write_table("sweep_table.csv", table)
    writer.write_table("sweep_best.csv", best)
    return {
        "cells": len(table),
        "best": best.to_dict(orient="records"),
        "benchmark_mapping": match_benchmark_series(series_list),
    }


def run_synth(config: RunConfig, writer: sf.OutputWriter) -> dict:
    """
    Write a synthetic labeled series. The first n_in samples stay clean so the warmup
    never hides an injected anomaly.
    """
    series = synth_series(
        config.distribution,
        config.length,
        config.anomaly_rate,
        config.anomaly_offset,
        seed=config.detector.seed,
        clean_prefix=config.detector.n_in,
    )
    writer.write_table("synthetic.csv", series_frame(series), float_format="%.17g")
    return {"length": len(series), "n_anomalies": series.n_anomalies}


def run_rmse_study(config: RunConfig, writer: sf.OutputWriter) -> dict:
    """
    Accuracy of the learned density over the window lengths.
    """
    study = rmse_study(
        config.distribution,
        config.n_in_values,
        config.trials,
        config.detector.kernel,
        config.detector.seed,
        perturbation=config.detector.perturbation,
    )
    writer.write_table("rmse_table.csv", study.table)
    writer.write_table("rmse_curves.csv", study.curves)
    return {"rmse": study.table.to_dict(orient="records")}


def run_digital_compare(config: RunConfig, writer: sf.OutputWriter) -> dict:
    """
    Fixed-point pipeline against the real-valued unnormalized estimate for every sample
    code, on a random window of n_in codes.
    """
    fixed_point = config.fixed_point
    rng = np.random.default_rng(config.detector.seed)
    window_codes = [
        int(code) for code in rng.integers(0, fixed_point.max_code + 1, config.detector.n_in)
    ]
    sigma_code = config.detector.kernel.bandwidth * fixed_point.max_code
    table = compare_fixed_point(window_codes, fixed_point, sigma_code)
    writer.write_table("digital_compare.csv", table)
    max_error = float(table["abs_error"].max())
    return {
        "window_codes": window_codes,
        "sigma_code": sigma_code,
        "max_abs_error": max_error,
        "error_bound": FIXED_POINT_ERROR_BOUND,
        "within_bound": max_error < FIXED_POINT_ERROR_BOUND,
    }


COMMAND_HANDLERS = {
    "detect": run_detect,
    "sweep": run_sweep,
    "synth": run_synth,
    "rmse-study": run_rmse_study,
    "digital-compare": run_digital_compare,
}


def run(config: RunConfig) -> int:
    """
    Execute one command. Outputs of a failed run are removed.
    :param config: Resolved configuration
    :return: Exit status
    """
    header = {"config": config.resolved()}
    try:
        with sf.OutputWriter(config.output_dir, header) as writer:
            report = COMMAND_HANDLERS[config.command](config, writer)
            writer.write_report(f"{config.command}_report.json", report)
    except (ValueError, FileNotFoundError, OSError, RuntimeError) as err:
        lh.write_log(
            lh.LoggingLevel.ERROR.value, f"Command {config.command} failed: {err}"
        )
        return EXIT_RUNTIME_ERROR
    lh.write_log(
        lh.LoggingLevel.INFO.value,
        f"Command {config.command} finished, outputs in {config.output_dir}.",
    )
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    """
    Parse the command line and run the command.
    :param argv: Argument list without the program name
    :return: Exit status
    """
    lh.configure_logging()
    try:
        config = parse_config(argv)
    except ConfigError as err:
        lh.write_log(lh.LoggingLevel.ERROR.value, f"Invalid configuration: {err}")
        return EXIT_USAGE_ERROR
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
