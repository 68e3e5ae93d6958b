"""Exception hierarchy.

Validation errors describe bad inputs or configuration; computation errors
describe data that cannot support a requested analysis. The CLI maps the two
families onto different exit codes.
"""

from __future__ import annotations


class ExtremeBenchError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ExtremeBenchError):
    pass


class ComputationError(ExtremeBenchError):
    pass


# -- ingest -----------------------------------------------------------------

class MissingColumn(ValidationError):
    def __init__(self, column: str, path: str | None = None) -> None:
        self.column = column
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"missing column {column!r}{where}")


class ParseError(ValidationError):
    """A cell or timestamp could not be parsed. ``row`` is the 1-based data row."""

    def __init__(self, row: int, column: str, value: str, reason: str = "") -> None:
        self.row = row
        self.column = column
        self.value = value
        msg = f"row {row}, column {column!r}: cannot parse {value!r}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class EmptyInput(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


# -- stats / disc / bench ---------------------------------------------------

class VariableMismatch(ValidationError):
    pass


class DegenerateRange(ComputationError):
    pass


class DegenerateInput(ComputationError):
    pass


class ZeroVariance(ComputationError):
    pass


class AllUndefined(ComputationError):
    pass


class WeightMismatch(ValidationError):
    pass


class PeriodMismatch(ValidationError):
    pass


class NoExtremeRows(ComputationError):
    pass


class AllZero(ComputationError):
    pass


# -- eva --------------------------------------------------------------------

class NoExceedances(ComputationError):
    pass


class TooFewExcesses(ComputationError):
    def __init__(self, n: int, minimum: int) -> None:
        self.n = n
        self.minimum = minimum
        super().__init__(
            f"only {n} excesses beyond the threshold, at least {minimum} are needed; "
            "lower the percentile (tail=low) or widen the time window"
        )


class FitDidNotConverge(ComputationError):
    def __init__(self, iterations: int, best_point: tuple[float, float], detail: str = "") -> None:
        self.iterations = iterations
        self.best_point = best_point
        msg = (
            f"GPD fit did not converge after {iterations} iterations; "
            f"best point shape={best_point[0]:.6g}, scale={best_point[1]:.6g}"
        )
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


# -- report -----------------------------------------------------------------

class EmptySeries(ValidationError):
    pass
