#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Collection of support functions for the main app: output files with embedded run
configuration, run reports and the optional export of detection results to an InfluxDB.
"""
import json
import os
import platform
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
import scipy
from dateutil import parser as date_parser
from influxdb import InfluxDBClient
from influxdb.exceptions import InfluxDBClientError
from requests.exceptions import ConnectTimeout

from source import logging_helper as lh
from source.detector import DetectionResult
from source.evaluation import LabeledSeries


@dataclass
class DataApp:  # pylint: disable=too-many-instance-attributes
    """
    Class to structure all database environment variables and verify them.
    """

    db_ip_address: str | None = None
    db_user_name: str | None = None
    db_user_password: str = ""
    db_name: str | None = None
    ssl: bool = False
    verify_ssl: bool = False
    db_port: int = 8086
    verified: bool = False
    error_message: str = ""

    @classmethod
    def from_env(cls, environ=None) -> "DataApp":
        """
        Read and check the database variables. Failures are recorded in error_message
        and leave verified False.
        :param environ: Mapping to read from, os.environ by default
        :return: Login information
        """
        environ = os.environ if environ is None else environ
        login = cls(
            db_ip_address=environ.get("DB_IP_ADDRESS"),
            db_user_name=environ.get("DB_USER_NAME"),
            db_user_password=environ.get("DB_USER_PASSWORD", ""),
            db_name=environ.get("DB_NAME"),
        )
        try:
            if None in (login.db_ip_address, login.db_user_name, login.db_name):
                raise ValueError(
                    "Not all needed env variable are defined. Please check the documentation "
                    "and add all necessary login information."
                )
            db_port = environ.get("DB_PORT")
            if db_port is not None:
                if not db_port.isdecimal():
                    raise ValueError("Environment variable DB_PORT is not a decimal number.")
                login.db_port = int(db_port)
            login.ssl = _env_flag(environ, "SSL")
            login.verify_ssl = _env_flag(environ, "VERIFY_SSL")
            login.verified = True
        except ValueError as err:
            login.error_message = str(err)
        return login


def _env_flag(environ, name: str) -> bool:
    value = environ.get(name)
    if value is None or value in ("False", "false"):
        return False
    if value in ("True", "true"):
        return True
    raise ValueError(f"Environment variable {name} is not True or False.")


class InfluxDBConnection(InfluxDBClient):
    """
    InfluxDB's connection class for handling in context manager
    """

    def __init__(self, login_information: DataApp):
        self.login_information = login_information
        super().__init__(
            host=login_information.db_ip_address,
            port=login_information.db_port,
            username=login_information.db_user_name,
            password=login_information.db_user_password,
            ssl=login_information.ssl,
            verify_ssl=login_information.verify_ssl,
        )

    def __enter__(self):
        return self


def check_and_verify_db_connection(login_information: DataApp) -> bool:
    """
    Function checks the connection and creates the database if it does not exist.
    :param login_information: Checked environment variables
    :return: True if the database can be used
    """
    if not login_information.verified:
        lh.write_log(lh.LoggingLevel.ERROR.value, login_information.error_message)
        return False
    try:
        with InfluxDBConnection(login_information) as connection:
            connection.ping()
            if not any(
                True
                for db in connection.get_list_database()
                if db["name"] == login_information.db_name
            ):
                connection.create_database(login_information.db_name)
            return True
    except (InfluxDBClientError, ConnectTimeout, ConnectionError) as err:
        error_message = (
            f"Error occurred during setting the database with error message: {err}. All "
            f"login information correct? Like database address, user name and so on?"
        )
        lh.write_log(lh.LoggingLevel.ERROR.value, error_message)
        return False


def point_time(series: LabeledSeries, index: int) -> datetime:
    """
    Time stamp of a sample. Numeric stamps are epoch seconds, text is parsed with
    dateutil, series without stamps get one second per sample from the epoch.
    :param series: Series of the sample
    :param index: Sample index
    :return: Time stamp in UTC
    """
    epoch = datetime(1970, 1, 1, tzinfo=timezone.utc)
    if series.timestamps is None:
        return epoch + timedelta(seconds=index)
    stamp = str(series.timestamps[index]).strip()
    try:
        return epoch + timedelta(seconds=float(stamp))
    except ValueError:
        parsed = date_parser.parse(stamp)
        if parsed.tzinfo is None:
            parsed = parsed.replace(tzinfo=timezone.utc)
        return parsed.astimezone(timezone.utc)


def detection_points(
    series: LabeledSeries, results: Sequence[DetectionResult]
) -> list[dict]:
    """
    Database points of one scored series.
    """
    return [
        {
            "measurement": "detection",
            "tags": {"series": series.name},
            "time": point_time(series, result.index),
            "fields": {
                "value": result.value,
                "likelihood": result.likelihood,
                "label": result.label.value,
                "is_anomaly": bool(series.labels[result.index]),
            },
        }
        for result in results
    ]


def write_detection_points(
    login_information: DataApp,
    series: LabeledSeries,
    results: Sequence[DetectionResult],
    watch_hen: lh.WatchHen,
) -> bool:
    """
    Write detection results to the database with own context manager.
    :param login_information: Checked environment variables
    :param series: Scored series
    :param results: Detection results of the series
    :param watch_hen: Failure tracker of the database writer
    :return: True if the points were written
    """
    try:
        with InfluxDBConnection(login_information) as conn:
            conn.switch_database(login_information.db_name)
            conn.write_points(detection_points(series, results))
            watch_hen.normal_processing()
            return True
    except InfluxDBClientError as err:
        watch_hen.failure_processing(
            type(err).__name__, err, "- data could not be saved to database."
        )
    except ConnectionError as err:
        watch_hen.failure_processing(
            type(err).__name__, err, "- no connection to database."
        )
    return False


def environment_metadata() -> dict:
    """
    Versions of the interpreter and the numeric stack.
    """
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


@dataclass
class OutputWriter:
    """
    Writes the outputs of one run into a directory. Every table carries the resolved
    configuration as '#' header lines. Used as context manager, all written files are
    removed again if the run fails.
    """

    output_dir: Path
    header: dict
    written: list[Path] = field(default_factory=list)

    def __enter__(self):
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        if exc_type is not None:
            for path in self.written:
                path.unlink(missing_ok=True)
            self.written.clear()
        return False

    def _header_lines(self) -> str:
        return "".join(
            f"# {key}: {json.dumps(value, sort_keys=True)}\n"
            for key, value in self.header.items()
        )

    def write_table(
        self, file_name: str, frame: pd.DataFrame, float_format: str = "%.10g"
    ) -> Path:
        """
        Comma-separated table below the configuration header.
        """
        path = self.output_dir / file_name
        with open(path, "w", encoding="utf-8", newline="") as file:
            file.write(self._header_lines())
            frame.to_csv(file, index=False, float_format=float_format, lineterminator="\n")
        self.written.append(path)
        return path

    def write_report(self, file_name: str, report: dict) -> Path:
        """
        Structured JSON report with configuration, metrics and environment.
        """
        path = self.output_dir / file_name
        document = {**self.header, **report, "environment": environment_metadata()}
        with open(path, "w", encoding="utf-8") as file:
            json.dump(document, file, indent=2, sort_keys=True, default=_json_default)
            file.write("\n")
        self.written.append(path)
        return path


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")
