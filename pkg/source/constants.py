"""
File contains all constants for easy central import and usage.
"""
from pathlib import Path

BASE_PATH = Path(__file__).resolve().parent.parent
FILES_PATH = BASE_PATH / "files"
CONFIGURATION_FILE_PATH = FILES_PATH / "config.json"
PRESETS_FILE_PATH = FILES_PATH / "presets.json"
LOG_FILE_PATH = FILES_PATH / "main.log"
OUTPUT_DIR_ENV = "KSG_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "output"
LOGGING_MAX_LEN_FAILURE = 5

DEFAULT_N_IN = 10
DEFAULT_SIGMA_KERNEL = 0.05
DEFAULT_P_THRES = 1e-4
DEFAULT_QUANTIZER_BITS = 4
MIN_QUANTIZER_BITS = 1
MAX_QUANTIZER_BITS = 16
QUANTIZE_TOLERANCE = 1e-9
PERTURBATION_FACTOR_FLOOR = 0.05

RMSE_GRID_POINTS = 256
DEFAULT_VALUE_COLUMN = "value"
DEFAULT_LABEL_COLUMN = "is_anomaly"
DEFAULT_TIMESTAMP_COLUMN = "timestamp"

# (number of anomalies, number of datapoints) of the five reference series
BENCHMARK_SERIES = {
    1: (8, 1439),
    2: (5, 1423),
    3: (13, 1439),
    4: (10, 1439),
    5: (44, 1440),
}
THRESHOLD_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1)
SIGMA_KERNEL_GRID = (0.02, 0.04, 0.06, 0.08, 0.1)
