import datetime as dt
import json
import shutil
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from extremebench import bundled_data_dir
from extremebench.ingest import VariableSchema, table_from_rows

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

SCHEMA = VariableSchema("y", ("a", "b"))


def make_table(y, a=None, b=None, start="2020-01-01T00:00", step_hours=1, case_id="case", schema=SCHEMA):
    y = np.asarray(y, float)
    n = y.size
    a = np.arange(n, dtype=float) if a is None else a
    b = np.sin(np.arange(n, dtype=float)) if b is None else b
    t0 = np.datetime64(start, "s")
    ts = t0 + (np.arange(n) * step_hours * 3600).astype("timedelta64[s]")
    return table_from_rows(case_id, schema, ts, {"y": y, "a": a, "b": b})


@pytest.fixture
def small_table():
    return make_table([5.0, 3.0, 8.0, 1.0, 9.0, 2.0], a=[1, 2, 3, 4, 5, 7], b=[2, 1, 4, 3, 6, 5])


@pytest.fixture(scope="session")
def demo_config_path() -> Path:
    return bundled_data_dir() / "demo-config.json"


@pytest.fixture
def demo_workspace(tmp_path, demo_config_path):
    """Copy of the bundled demo with a smaller bootstrap for fast pipeline tests."""
    d = tmp_path / "demo"
    d.mkdir()
    for f in bundled_data_dir().iterdir():
        if f.suffix in (".csv", ".json"):
            shutil.copy(f, d / f.name)
    cfg = json.loads((d / "demo-config.json").read_text())
    cfg["eva"]["n_boot"] = 100
    (d / "fast-config.json").write_text(json.dumps(cfg))
    return d


def write_csv_text(path: Path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def hours(n, start=dt.datetime(2021, 3, 1, 12)):
    return [(start + dt.timedelta(hours=i)).isoformat(timespec="minutes") for i in range(n)]


# acceptance verdicts, printed once at the end of the session
ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
