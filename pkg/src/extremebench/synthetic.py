"""Seeded PV-like hourly data for demos and end-to-end tests.

Production follows irradiance, which is driven by a day-persistent cloud
process; temperature, humidity and wind respond to the same clouds so the
companions correlate with production and with each other.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .ingest import TimeSeriesTable, VariableSchema, table_from_rows

PV_SCHEMA = VariableSchema(
    dependent="production",
    companions=("humidity", "temperature", "cloudcover", "windspeed", "solar", "diffuse_solar"),
)


@dataclass(frozen=True)
class SiteProfile:
    capacity: float = 1.0  # peak production
    mean_cloud: float = 0.45  # long-run mean cloud fraction
    cloud_persistence: float = 0.7  # day-to-day AR(1) coefficient
    base_temperature: float = 16.0
    seasonal_amplitude: float = 8.0
    wind_mean: float = 3.0


def generate_pv_case(
    case_id: str,
    seed: int,
    profile: SiteProfile = SiteProfile(),
    start: dt.date = dt.date(2022, 1, 1),
    days: int = 730,
    hours: tuple[int, int] = (6, 20),
    decimals: int = 3,
) -> TimeSeriesTable:
    """Hourly rows between ``hours[0]`` (inclusive) and ``hours[1]`` (exclusive)."""
    rng = np.random.default_rng(seed)
    hrs = np.arange(*hours)
    n_h = hrs.size

    # latent daily cloud state in (0, 1) via a logistic AR(1)
    logit_mean = np.log(profile.mean_cloud / (1 - profile.mean_cloud))
    z = np.empty(days)
    z[0] = logit_mean
    for d in range(1, days):
        z[d] = logit_mean + profile.cloud_persistence * (z[d - 1] - logit_mean) + rng.normal(0, 1.1)
    day_cloud = 1 / (1 + np.exp(-z))

    doy = (np.arange(days) + start.timetuple().tm_yday - 1) % 365
    season = np.cos(2 * np.pi * (doy - 172) / 365)  # +1 midsummer

    cloud = np.clip(day_cloud[:, None] + rng.normal(0, 0.08, (days, n_h)), 0, 1)
    elev = np.clip(np.sin(np.pi * (hrs - 6 + 0.5) / 14), 0, None)[None, :] * (0.7 + 0.3 * season[:, None])
    clear = 1000 * elev
    solar = np.clip(clear * (1 - 0.75 * cloud**2.5) + rng.normal(0, 15, (days, n_h)), 1, None)
    diffuse = np.clip(solar * (0.15 + 0.6 * cloud) + rng.normal(0, 5, (days, n_h)), 0.5, None)
    temperature = (profile.base_temperature + profile.seasonal_amplitude * season[:, None]
                   + 6 * elev - 3 * cloud + rng.normal(0, 1.2, (days, n_h)))
    humidity = np.clip(65 - 1.8 * (temperature - profile.base_temperature) + 22 * cloud
                       + rng.normal(0, 5, (days, n_h)), 5, 100)
    wind = rng.gamma(4.0, profile.wind_mean / 4.0, (days, n_h)) + 1.5 * cloud
    derate = 1 - 0.004 * (temperature + 0.03 * solar - 25)
    production = profile.capacity * solar / 1000 * derate + np.abs(rng.normal(0, 0.01, (days, n_h)))
    production = np.clip(production, 0.001, None)

    base = np.datetime64(start.isoformat(), "s")
    stamps = (base + (np.arange(days)[:, None] * 86400 + hrs[None, :] * 3600).astype("timedelta64[s]")).ravel()
    cols = {
        "production": production,
        "humidity": humidity,
        "temperature": temperature,
        "cloudcover": 100 * cloud,
        "windspeed": wind,
        "solar": solar,
        "diffuse_solar": diffuse,
    }
    cols = {k: np.round(v.ravel(), decimals) for k, v in cols.items()}
    return table_from_rows(case_id, PV_SCHEMA, stamps, cols)


# the two bundled cases: a sunnier larger site and a cloudier smaller one
BUNDLED_CASES = {
    "site_a": (11, SiteProfile(capacity=1.0, mean_cloud=0.35, base_temperature=18.0)),
    "site_b": (23, SiteProfile(capacity=0.8, mean_cloud=0.55, cloud_persistence=0.8, base_temperature=13.0,
                               wind_mean=4.5)),
}


def bundled_config(paths: dict[str, str], seed: int = 20240601) -> dict:
    """Run configuration for the bundled cases, using library defaults elsewhere."""
    from .bench import SUGGESTED_WEIGHTS

    return {
        "seed": seed,
        "cases": [{"id": cid, "path": p} for cid, p in paths.items()],
        "schema": {"dependent": PV_SCHEMA.dependent, "companions": list(PV_SCHEMA.companions)},
        "window": {"start": "13:00", "end": "16:00"},
        "threshold": {"percentile": 25, "tail": "low"},
        "disc": {"q_hi": 90, "q_lo": 10},
        "eva": {"min_excesses": 10, "n_boot": 1000, "ci_level": 0.95, "return_periods": [1, 2, 5, 10, 25]},
        "benchmark": {"weights": dict(SUGGESTED_WEIGHTS), "statistic": "mean", "normalization": "min_max"},
        "report": {"physical_floor": 0.0},
    }


def write_bundled(directory) -> None:
    """Regenerate the packaged demo CSVs and config into ``directory``."""
    import json
    from pathlib import Path

    from .ingest import write_csv

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {}
    for cid, (seed, profile) in BUNDLED_CASES.items():
        write_csv(generate_pv_case(cid, seed, profile), d / f"{cid}.csv")
        paths[cid] = f"{cid}.csv"
    (d / "demo-config.json").write_text(json.dumps(bundled_config(paths), indent=2) + "\n", encoding="utf-8")
