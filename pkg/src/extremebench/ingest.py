"""CSV loading, schema validation and time-of-day filtering of case datasets."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyInput, MissingColumn, ParseError, SchemaError

__all__ = [
    "VariableSchema",
    "TimeSeriesTable",
    "TimeWindowFilter",
    "load_csv",
    "write_csv",
    "filter_time_window",
    "parse_time_of_day",
    "table_from_rows",
]


@dataclass(frozen=True)
class VariableSchema:
    """Names of the dependent variable, its companions and the timestamp column."""

    dependent: str
    companions: tuple[str, ...]
    timestamp_column: str = "timestamp"

    def __post_init__(self) -> None:
        object.__setattr__(self, "companions", tuple(self.companions))
        if not self.companions:
            raise SchemaError("at least one companion variable is required")
        if len(set(self.companions)) != len(self.companions):
            raise SchemaError(f"duplicate companion variables: {list(self.companions)}")
        if self.dependent in self.companions:
            raise SchemaError(f"dependent variable {self.dependent!r} is also listed as a companion")
        if self.timestamp_column == self.dependent or self.timestamp_column in self.companions:
            raise SchemaError("timestamp column cannot double as a value column")

    @property
    def variables(self) -> tuple[str, ...]:
        return (self.dependent, *self.companions)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeSeriesTable:
    """Timestamped observations for one case.

    ``timestamps`` is a ``datetime64[s]`` array and ``values`` maps every schema
    variable to a float array of the same length. Arrays are read-only.
    """

    case_id: str
    timestamps: np.ndarray
    values: Mapping[str, np.ndarray]
    schema: VariableSchema

    def __post_init__(self) -> None:
        ts = _frozen(np.asarray(self.timestamps, dtype="datetime64[s]"))
        n = ts.shape[0]
        vals = {}
        for name in self.schema.variables:
            if name not in self.values:
                raise MissingColumn(name)
            col = np.asarray(self.values[name], dtype=float)
            if col.shape != (n,):
                raise SchemaError(f"column {name!r} has shape {col.shape}, expected ({n},)")
            if not np.all(np.isfinite(col)):
                raise SchemaError(f"column {name!r} contains non-finite values")
            vals[name] = _frozen(col)
        if n > 1 and np.any(ts[1:] < ts[:-1]):
            raise SchemaError("timestamps must be non-decreasing")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.timestamps.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeSeriesTable):
            return NotImplemented
        return (
            self.case_id == other.case_id
            and self.schema == other.schema
            and np.array_equal(self.timestamps, other.timestamps)
            and all(np.array_equal(self.values[k], other.values[k]) for k in self.schema.variables)
        )

    __hash__ = None  # type: ignore[assignment]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[name]
        except KeyError:
            raise MissingColumn(name) from None

    @property
    def dependent(self) -> np.ndarray:
        return self.values[self.schema.dependent]

    def select(self, mask: np.ndarray) -> "TimeSeriesTable":
        """Rows where the boolean ``mask`` is true, order preserved."""
        mask = np.asarray(mask, dtype=bool)
        return TimeSeriesTable(
            case_id=self.case_id,
            timestamps=self.timestamps[mask],
            values={k: v[mask] for k, v in self.values.items()},
            schema=self.schema,
        )

    def matrix(self, variables: Sequence[str]) -> np.ndarray:
        """``(n_rows, len(variables))`` float array."""
        return np.column_stack([self.column(v) for v in variables]) if len(self) else np.empty((0, len(variables)))

    def years(self) -> np.ndarray:
        return self.timestamps.astype("datetime64[Y]").astype(int) + 1970

    def seconds_of_day(self) -> np.ndarray:
        day = self.timestamps.astype("datetime64[D]")
        return (self.timestamps - day).astype(int)


def _parse_timestamp(text: str) -> dt.datetime:
    value = dt.datetime.fromisoformat(text.strip())
    if value.tzinfo is not None:
        raise ValueError("timezone offsets are not supported")
    return value


def _parse_value(text: str) -> float:
    s = text.strip()
    if not s or "_" in s:
        raise ValueError("not a plain decimal number")
    x = float(s)
    if not math.isfinite(x):
        raise ValueError("value is not finite")
    return x


def load_csv(path: str | Path, schema: VariableSchema, case_id: str | None = None) -> TimeSeriesTable:
    """Load a case from a UTF-8 comma-separated file with a header row.

    Extra columns are ignored. Rows come back in file order, stably sorted by
    timestamp when the file is not already ordered. A row with any missing,
    non-numeric or non-finite schema cell fails the whole load with
    :class:`ParseError` naming its 1-based data row.
    """
    path = Path(path)
    if case_id is None:
        case_id = path.stem
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyInput(f"{path}: file is empty") from None
        index = {name: i for i, name in enumerate(header)}
        for name in (schema.timestamp_column, *schema.variables):
            if name not in index:
                raise MissingColumn(name, str(path))
        ts_idx = index[schema.timestamp_column]
        var_idx = [(name, index[name]) for name in schema.variables]

        stamps: list[dt.datetime] = []
        cols: dict[str, list[float]] = {name: [] for name in schema.variables}
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                row = row + [""] * (len(header) - len(row))
            try:
                stamps.append(_parse_timestamp(row[ts_idx]))
            except ValueError as exc:
                raise ParseError(row_no, schema.timestamp_column, row[ts_idx], str(exc)) from None
            for name, i in var_idx:
                try:
                    cols[name].append(_parse_value(row[i]))
                except ValueError as exc:
                    raise ParseError(row_no, name, row[i], str(exc)) from None

    if not stamps:
        raise EmptyInput(f"{path}: no data rows")
    ts = np.array(stamps, dtype="datetime64[s]")
    values = {name: np.array(v, dtype=float) for name, v in cols.items()}
    if ts.shape[0] > 1 and np.any(ts[1:] < ts[:-1]):
        order = np.argsort(ts, kind="stable")
        ts = ts[order]
        values = {name: v[order] for name, v in values.items()}
    return TimeSeriesTable(case_id=case_id, timestamps=ts, values=values, schema=schema)


def _format_timestamp(ts: np.datetime64) -> str:
    text = str(ts)
    return text[:-3] if text.endswith(":00") else text


def write_csv(table: TimeSeriesTable, path: str | Path) -> None:
    """Write ``table`` so that :func:`load_csv` reproduces it exactly."""
    names = table.schema.variables
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([table.schema.timestamp_column, *names])
        cols = [table.values[n] for n in names]
        for i, ts in enumerate(table.timestamps):
            writer.writerow([_format_timestamp(ts), *(repr(float(c[i])) for c in cols)])


def parse_time_of_day(value: str | dt.time) -> dt.time:
    if isinstance(value, dt.time):
        return value
    return dt.time.fromisoformat(value.strip())


@dataclass(frozen=True)
class TimeWindowFilter:
    """Half-open time-of-day window ``[start_time, end_time)`` within one day."""

    start_time: dt.time = dt.time(13, 0)
    end_time: dt.time = dt.time(16, 0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "start_time", parse_time_of_day(self.start_time))
        object.__setattr__(self, "end_time", parse_time_of_day(self.end_time))
        if not self.start_time < self.end_time:
            raise SchemaError(f"window start {self.start_time} must precede end {self.end_time}")

    @classmethod
    def full_day(cls) -> "TimeWindowFilter":
        return cls(dt.time(0, 0), dt.time(23, 59, 59, 999999))

    def _bounds(self) -> tuple[float, float]:
        def secs(t: dt.time) -> float:
            return t.hour * 3600 + t.minute * 60 + t.second + t.microsecond / 1e6

        return secs(self.start_time), secs(self.end_time)

    def mask(self, table: TimeSeriesTable) -> np.ndarray:
        lo, hi = self._bounds()
        sod = table.seconds_of_day()
        return (sod >= lo) & (sod < hi)


def filter_time_window(table: TimeSeriesTable, window: TimeWindowFilter) -> TimeSeriesTable:
    return table.select(window.mask(table))


def table_from_rows(
    case_id: str,
    schema: VariableSchema,
    timestamps: Iterable[str | dt.datetime | np.datetime64],
    columns: Mapping[str, Sequence[float]],
) -> TimeSeriesTable:
    """Convenience constructor used by tests and the synthetic generator."""
    ts = np.array([np.datetime64(t, "s") if not isinstance(t, str) else np.datetime64(_parse_timestamp(t), "s")
                   for t in timestamps], dtype="datetime64[s]")
    return TimeSeriesTable(case_id=case_id, timestamps=ts, values={k: np.asarray(v, float) for k, v in columns.items()},
                           schema=schema)
