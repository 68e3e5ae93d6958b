import datetime as dt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import hours, write_csv_text
from extremebench.errors import EmptyInput, MissingColumn, ParseError, SchemaError
from extremebench.ingest import (
    TimeSeriesTable,
    TimeWindowFilter,
    VariableSchema,
    filter_time_window,
    load_csv,
    table_from_rows,
    write_csv,
)

PV = VariableSchema("Production", ("Solar", "Temperature"))
HEADER = ["timestamp", "Production", "Solar", "Temperature"]


def test_three_row_file(tmp_path):
    p = write_csv_text(tmp_path / "c.csv", HEADER, [[t, 1.5, 200, 20] for t in hours(3)])
    t = load_csv(p, PV)
    assert len(t) == 3
    assert t.case_id == "c"
    np.testing.assert_array_equal(t.column("Solar"), [200, 200, 200])


def test_missing_column(tmp_path):
    p = write_csv_text(tmp_path / "c.csv", ["timestamp", "Production", "Temperature"], [[hours(1)[0], 1, 2]])
    with pytest.raises(MissingColumn) as exc:
        load_csv(p, PV)
    assert exc.value.column == "Solar"


def test_bad_cell_reports_row(tmp_path):
    rows = [[t, 1, 2, 3] for t in hours(10)]
    rows[6][2] = "n/a"
    p = write_csv_text(tmp_path / "c.csv", HEADER, rows)
    with pytest.raises(ParseError) as exc:
        load_csv(p, PV)
    assert exc.value.row == 7
    assert exc.value.column == "Solar"
    assert "row 7" in str(exc.value)


@pytest.mark.parametrize("cell", ["", "nan", "inf", "1_000", "abc"])
def test_rejected_cells(tmp_path, cell):
    rows = [[t, 1, 2, 3] for t in hours(3)]
    rows[1][1] = cell
    p = write_csv_text(tmp_path / "c.csv", HEADER, rows)
    with pytest.raises(ParseError):
        load_csv(p, PV)


def test_malformed_timestamp(tmp_path):
    p = write_csv_text(tmp_path / "c.csv", HEADER, [["2021-13-01T00:00", 1, 2, 3]])
    with pytest.raises(ParseError) as exc:
        load_csv(p, PV)
    assert exc.value.row == 1


def test_timezone_rejected(tmp_path):
    p = write_csv_text(tmp_path / "c.csv", HEADER, [["2021-01-01T00:00+01:00", 1, 2, 3]])
    with pytest.raises(ParseError):
        load_csv(p, PV)


def test_empty_inputs(tmp_path):
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(EmptyInput):
        load_csv(tmp_path / "e.csv", PV)
    p = write_csv_text(tmp_path / "h.csv", HEADER, [])
    with pytest.raises(EmptyInput):
        load_csv(p, PV)


def test_unsorted_rows_are_sorted_stably(tmp_path):
    ts = hours(3)
    p = write_csv_text(tmp_path / "c.csv", HEADER, [[ts[2], 3, 0, 0], [ts[0], 1, 0, 0], [ts[1], 2, 0, 0]])
    t = load_csv(p, PV)
    np.testing.assert_array_equal(t.dependent, [1, 2, 3])


def test_extra_columns_ignored(tmp_path):
    p = write_csv_text(tmp_path / "c.csv", HEADER + ["note"], [[hours(1)[0], 1, 2, 3, "x"]])
    assert set(load_csv(p, PV).values) == {"Production", "Solar", "Temperature"}


def test_schema_validation():
    with pytest.raises(SchemaError):
        VariableSchema("y", ())
    with pytest.raises(SchemaError):
        VariableSchema("y", ("a", "a"))
    with pytest.raises(SchemaError):
        VariableSchema("y", ("y",))


def test_table_is_read_only(small_table):
    with pytest.raises(ValueError):
        small_table.dependent[0] = 0.0


def test_table_rejects_non_finite():
    with pytest.raises(SchemaError):
        table_from_rows("c", VariableSchema("y", ("a",)), hours(2), {"y": [1, np.nan], "a": [1, 2]})


def _at(times):
    schema = VariableSchema("y", ("a",))
    stamps = [dt.datetime(2021, 6, 1, *t) for t in times]
    return table_from_rows("c", schema, stamps, {"y": list(range(len(times))), "a": [0.0] * len(times)})


def test_window_boundaries_half_open():
    t = _at([(12, 59), (13, 0), (15, 59), (16, 0)])
    f = filter_time_window(t, TimeWindowFilter(dt.time(13), dt.time(16)))
    assert [str(x)[11:16] for x in f.timestamps] == ["13:00", "15:59"]


def test_default_window_is_midday_peak():
    w = TimeWindowFilter()
    assert (w.start_time, w.end_time) == (dt.time(13), dt.time(16))


def test_full_day_is_identity():
    t = _at([(0, 0), (6, 30), (12, 0), (23, 59)])
    assert filter_time_window(t, TimeWindowFilter.full_day()) == t


def test_window_order_validated():
    with pytest.raises(SchemaError):
        TimeWindowFilter(dt.time(16), dt.time(13))


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=30))
def test_csv_round_trip(tmp_path_factory, ys):
    schema = VariableSchema("y", ("a",))
    n = len(ys)
    t = table_from_rows("rt", schema, hours(n), {"y": ys, "a": [float(i) / 3 for i in range(n)]})
    p = tmp_path_factory.mktemp("rt") / "rt.csv"
    write_csv(t, p)
    assert load_csv(p, schema) == t


@given(st.lists(st.integers(0, 24 * 60 - 1), min_size=1, max_size=40),
       st.integers(0, 23), st.integers(1, 24))
def test_window_filter_matches_definition(minutes, start_h, length):
    end_h = min(start_h + length, 24)
    if end_h == 24:
        window = TimeWindowFilter(dt.time(start_h), dt.time(23, 59, 59, 999999))
    else:
        window = TimeWindowFilter(dt.time(start_h), dt.time(end_h))
    minutes = sorted(minutes)
    stamps = [dt.datetime(2021, 1, 1) + dt.timedelta(minutes=m) for m in minutes]
    t = table_from_rows("w", VariableSchema("y", ("a",)), stamps, {"y": minutes, "a": minutes})
    kept = filter_time_window(t, window).dependent.tolist()
    expected = [m for m in minutes if start_h * 60 <= m < end_h * 60]
    assert kept == expected


def test_select_preserves_order(small_table):
    sub = small_table.select(small_table.dependent > 2.5)
    np.testing.assert_array_equal(sub.dependent, [5, 3, 8, 9])
    assert isinstance(sub, TimeSeriesTable)
