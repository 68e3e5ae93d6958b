"""Extreme-event benchmarking of time series.

Peaks-over-threshold extreme value analysis, correlation-shift classification
under extremes, and weighted cross-case benchmark scores.
"""

from pathlib import Path

from .errors import ComputationError, ExtremeBenchError, ValidationError
from .ingest import TimeSeriesTable, TimeWindowFilter, VariableSchema, load_csv

__version__ = "0.1.0"


def bundled_data_dir() -> Path:
    """Directory holding the packaged two-case synthetic demo and its config."""
    return Path(__file__).with_name("data")


__all__ = [
    "ComputationError",
    "ExtremeBenchError",
    "TimeSeriesTable",
    "TimeWindowFilter",
    "ValidationError",
    "VariableSchema",
    "bundled_data_dir",
    "load_csv",
    "__version__",
]
