"""Run configuration: JSON file plus command-line overrides.

Relative input paths resolve against the directory holding the config file.
The resolved form (:meth:`RunConfig.to_dict`) is what every run echoes to
``config-resolved.json``; loading that echo reproduces the run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .bench import BenchmarkConfig
from .errors import SchemaError, ValidationError
from .ingest import TimeWindowFilter, VariableSchema, parse_time_of_day

DEFAULT_PERIODS = (1.0, 2.0, 5.0, 10.0, 25.0)


class ConfigError(ValidationError):
    """Run configuration is missing keys or holds invalid values."""


@dataclass(frozen=True)
class CaseInput:
    case_id: str
    path: Path


@dataclass(frozen=True)
class RunConfig:
    cases: tuple[CaseInput, ...]
    schema: VariableSchema
    seed: int
    weights: Mapping[str, float]
    window: TimeWindowFilter | None = field(default_factory=TimeWindowFilter)
    percentile: float = 25.0
    tail: str = "low"
    q_hi: float = 90.0
    q_lo: float = 10.0
    min_excesses: int = 10
    n_boot: int = 1000
    ci_level: float = 0.95
    return_periods: tuple[float, ...] = DEFAULT_PERIODS
    statistic: str = "mean"
    normalization: str = "min_max"
    physical_floor: float | None = None
    heatmap_colors: Mapping[str, str] = field(default_factory=dict)
    output_dir: Path | None = None

    def validate(self) -> None:
        """Everything that can be checked without reading data."""
        if not self.cases:
            raise ConfigError("config lists no cases")
        ids = [c.case_id for c in self.cases]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"case ids must be unique, got {ids}")
        for cid in ids:
            if not cid or any(ch in cid for ch in "/\\") or cid in (".", ".."):
                raise ConfigError(f"case id {cid!r} is not usable as a directory name")
        if not 0 < self.percentile < 100:
            raise ConfigError(f"percentile must lie in (0, 100), got {self.percentile}")
        if self.tail not in ("low", "high"):
            raise ConfigError(f"tail must be 'low' or 'high', got {self.tail!r}")
        if not 0 <= self.q_lo <= 50 <= self.q_hi <= 100:
            raise ConfigError(f"need 0 <= q_lo <= 50 <= q_hi <= 100, got {self.q_lo}, {self.q_hi}")
        if self.min_excesses < 2:
            raise ConfigError("min_excesses must be at least 2")
        if self.n_boot < 100:
            raise ConfigError(f"n_boot must be at least 100, got {self.n_boot}")
        if not 0 < self.ci_level < 1:
            raise ConfigError(f"ci_level must lie in (0, 1), got {self.ci_level}")
        if not self.return_periods or any(not (t > 0 and math.isfinite(t)) for t in self.return_periods):
            raise ConfigError(f"return periods must be positive, got {list(self.return_periods)}")
        if len(set(self.return_periods)) != len(self.return_periods):
            raise ConfigError("return periods must be distinct")
        if self.normalization not in ("min_max", "z_score", "none"):
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        # raises WeightMismatch on bad values or coverage
        self.benchmark_config().check_variables(self.schema.companions)

    def benchmark_config(self, normalization=None) -> BenchmarkConfig:
        return BenchmarkConfig(
            weights=dict(self.weights),
            statistic=self.statistic,  # type: ignore[arg-type]
            normalization=normalization,
            return_periods=self.return_periods,
        )

    def to_dict(self) -> dict[str, Any]:
        """Resolved configuration with absolute input paths; the output directory is left out."""
        return {
            "seed": self.seed,
            "cases": [{"id": c.case_id, "path": str(c.path)} for c in self.cases],
            "schema": {
                "dependent": self.schema.dependent,
                "companions": list(self.schema.companions),
                "timestamp_column": self.schema.timestamp_column,
            },
            "window": None if self.window is None else {
                "start": self.window.start_time.isoformat(),
                "end": self.window.end_time.isoformat(),
            },
            "threshold": {"percentile": self.percentile, "tail": self.tail},
            "disc": {"q_hi": self.q_hi, "q_lo": self.q_lo},
            "eva": {
                "min_excesses": self.min_excesses,
                "n_boot": self.n_boot,
                "ci_level": self.ci_level,
                "return_periods": list(self.return_periods),
            },
            "benchmark": {
                "weights": dict(self.weights),
                "statistic": self.statistic,
                "normalization": self.normalization,
            },
            "report": {"physical_floor": self.physical_floor, "heatmap_colors": dict(self.heatmap_colors)},
        }


def _section(raw: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    v = raw.get(key) or {}
    if not isinstance(v, Mapping):
        raise ConfigError(f"{key!r} must be an object")
    return v


def _num(v: Any, key: str, kind=float):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number, got {v!r}")
    if kind is int:
        if float(v) != int(v):
            raise ConfigError(f"{key} must be an integer, got {v!r}")
        return int(v)
    return float(v)


def parse_config(raw: Mapping[str, Any], base_dir: str | Path = ".", overrides: Mapping[str, Any] | None = None
                 ) -> RunConfig:
    """Build and validate a :class:`RunConfig` from parsed JSON.

    ``overrides`` uses dotted key paths (``"eva.n_boot"``, ``"threshold.tail"``)
    and wins over the file.
    """
    raw = json.loads(json.dumps(raw))  # private deep copy
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        node = raw
        *parents, leaf = dotted.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value

    base = Path(base_dir).resolve()
    if "seed" not in raw:
        raise ConfigError("config must set 'seed' (runs are never seeded from the clock)")
    seed = _num(raw["seed"], "seed", int)

    cases_raw = raw.get("cases")
    if not isinstance(cases_raw, list) or not cases_raw:
        raise ConfigError("'cases' must be a non-empty list of {id, path}")
    cases = []
    for i, c in enumerate(cases_raw):
        if not isinstance(c, Mapping) or "path" not in c:
            raise ConfigError(f"case #{i + 1} needs a 'path'")
        p = Path(c["path"])
        cases.append(CaseInput(str(c.get("id") or p.stem), p if p.is_absolute() else base / p))

    s = _section(raw, "schema")
    if "dependent" not in s or "companions" not in s:
        raise ConfigError("'schema' needs 'dependent' and 'companions'")
    try:
        schema = VariableSchema(s["dependent"], tuple(s["companions"]), s.get("timestamp_column", "timestamp"))
    except SchemaError as e:
        raise ConfigError(str(e)) from e

    if "window" in raw and raw["window"] is None:
        window = None
    else:
        w = _section(raw, "window")
        try:
            window = TimeWindowFilter(parse_time_of_day(w.get("start", "13:00")), parse_time_of_day(w.get("end", "16:00")))
        except (ValueError, SchemaError) as e:
            raise ConfigError(f"bad time window: {e}") from e

    th, disc, eva, bench = (_section(raw, k) for k in ("threshold", "disc", "eva", "benchmark"))
    rep = _section(raw, "report")
    if "weights" not in bench or not isinstance(bench["weights"], Mapping):
        raise ConfigError("'benchmark.weights' must map every companion to a weight")
    periods = eva.get("return_periods", list(DEFAULT_PERIODS))
    if isinstance(periods, str):
        periods = [p for p in periods.split(",") if p.strip()]
    try:
        periods = tuple(float(t) for t in periods)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad return periods: {periods!r}") from e
    floor = rep.get("physical_floor")
    out = raw.get("output_dir")

    cfg = RunConfig(
        cases=tuple(cases),
        schema=schema,
        seed=seed,
        weights={k: _num(v, f"benchmark.weights.{k}") for k, v in bench["weights"].items()},
        window=window,
        percentile=_num(th.get("percentile", 25.0), "threshold.percentile"),
        tail=str(th.get("tail", "low")),
        q_hi=_num(disc.get("q_hi", 90.0), "disc.q_hi"),
        q_lo=_num(disc.get("q_lo", 10.0), "disc.q_lo"),
        min_excesses=_num(eva.get("min_excesses", 10), "eva.min_excesses", int),
        n_boot=_num(eva.get("n_boot", 1000), "eva.n_boot", int),
        ci_level=_num(eva.get("ci_level", 0.95), "eva.ci_level"),
        return_periods=periods,
        statistic=str(bench.get("statistic", "mean")),
        normalization=str(bench.get("normalization", "min_max")),
        physical_floor=None if floor is None else _num(floor, "report.physical_floor"),
        heatmap_colors=dict(rep.get("heatmap_colors") or {}),
        output_dir=None if out is None else (Path(out) if Path(out).is_absolute() else base / out),
    )
    if cfg.statistic not in ("mean", "sum"):
        raise ConfigError(f"benchmark.statistic must be 'mean' or 'sum', got {cfg.statistic!r}")
    cfg.validate()
    return cfg


def load_config(path: str | Path, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(raw, Mapping):
        raise ConfigError("config must be a JSON object")
    return parse_config(raw, path.parent, overrides)
