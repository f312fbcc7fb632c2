#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Configuration and functions for logging
"""
import time
import logging
import json
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from collections import deque
from pathlib import Path

from source.constants import (
    CONFIGURATION_FILE_PATH,
    LOG_FILE_PATH,
    LOGGING_MAX_LEN_FAILURE,
)


@dataclass
class WatchHen:
    """
    Helper class to log all errors of the given unit, e.g. an input series or the
    database writer.
    """

    unit_name: str
    online_status: bool = field(default=True)
    failure_count: int = field(default=0)
    last_failures: deque = field(
        default_factory=lambda: deque(maxlen=LOGGING_MAX_LEN_FAILURE)
    )

    def normal_processing(self) -> None:
        """
        Function is called if the unit was processed without errors.
        :return: None
        """
        if not self.online_status:
            self.online_status = True
            self.last_failures.clear()
            message = (
                f"{self.unit_name} processed again. {self.failure_count} errors "
                f"occurred before."
            )
            logging.log(logging.INFO, message)

    def failure_processing(self, error_type, error_message, error_context) -> None:
        """
        This function is called every time an error appears for a unit.
        :param error_type: Type of the error for counting
        :param error_message: Error message
        :param error_context: Special context where error is appears
        :return: None
        """
        self.failure_count += 1
        self.last_failures.append(
            Failure(error_type=error_type, message=error_message, context=error_context)
        )
        count_similar_failure = len(
            [True for element in self.last_failures if element.error_type == error_type]
        )
        message = f"{self.unit_name} {error_context} | {error_type} | {error_message}"
        logging.log(logging.DEBUG, message)
        if count_similar_failure == 1:
            logging.log(logging.WARNING, message)
        elif count_similar_failure == 2:
            message = (
                f"{self.unit_name} {error_context} multiple times and was marked "
                f"as failed."
            )
            logging.log(logging.ERROR, message)
            self.online_status = False

    def __repr__(self):
        return "Failures: " + str(self.last_failures)


@dataclass
class Failure:
    """
    Helper class to collect all information for each failure
    """

    error_type: str
    message: str
    context: str
    timestamp: datetime = field(default_factory=datetime.utcnow)


class LoggingLevel(Enum):
    """
    Collection for logging levels
    """

    DEBUG = logging.DEBUG
    INFO = logging.INFO
    WARNING = logging.WARNING
    ERROR = logging.ERROR
    CRITICAL = logging.CRITICAL


LOG_LEVELS = {
    "debug": LoggingLevel.DEBUG.value,
    "info": LoggingLevel.INFO.value,
    "warning": LoggingLevel.WARNING.value,
    "error": LoggingLevel.ERROR.value,
    "critical": LoggingLevel.CRITICAL.value,
}


@dataclass
class LogLevel:
    """
    Configuration class for reading the logging level and provide to application.
    """

    config_level: int = logging.WARNING

    @classmethod
    def from_config(cls, config_path: Path = CONFIGURATION_FILE_PATH) -> "LogLevel":
        """
        Read the log level from the general section of the configuration file.
        :param config_path: Path of the configuration file
        :return: LogLevel with the configured or the default level
        """
        level = cls()
        try:
            with open(config_path, encoding="utf-8") as file:
                general_config = json.load(file).get("general", {})
            if general_config.get("log_level") in LOG_LEVELS:
                level.config_level = LOG_LEVELS[general_config["log_level"]]
        except FileNotFoundError as err:
            print(
                f"The configuration file could not be found. Default log level is used. "
                f"Error occurred message: {err}."
            )
        return level


def configure_logging(
    level: int | None = None, log_file: Path | None = LOG_FILE_PATH
) -> None:
    """
    Install the file handler for the application log. Times are written in UTC.
    :param level: Explicit level, otherwise read from the configuration file
    :param log_file: Target log file, None logs to stderr only
    :return: None
    """
    if level is None:
        level = LogLevel.from_config().config_level
    handler_kwargs = {}
    if log_file is not None:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handler_kwargs = {"filename": str(log_file), "encoding": "utf-8", "filemode": "a"}
    logging.basicConfig(
        level=level,
        format="%(asctime)s: %(levelname)s - %(name)s - %(message)s",
        datefmt="%d-%b-%y %H:%M:%S",
        force=True,
        **handler_kwargs,
    )
    logging.Formatter.converter = time.gmtime


def write_log(level: int, message: str):
    """
    Write function for logging information which the user should also see on the console
    :param level: log level for the message
    :param message: log message
    :return: No return value
    """
    logging.log(level, message)
    print(message)
