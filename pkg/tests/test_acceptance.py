"""Exit criteria. Each test checks one criterion and records a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

import oracles
from conftest import record_criterion
from extremebench.bench import (
    SUGGESTED_WEIGHTS,
    BenchmarkConfig,
    ExtremeConditionStats,
    bare_rate,
    benchmark_scores,
    exceedance_factor,
    historical_share,
)
from extremebench.config import load_config
from extremebench.disc import CorrelationDelta, classify, resolve_thresholds
from extremebench.eva import (
    ExceedanceSet,
    GPDFit,
    PoissonRate,
    ReturnLevelEntry,
    ThresholdSpec,
    bootstrap_ci,
    extract_exceedances,
    fit_diagnostics,
    fit_gpd_mle,
    resolve_threshold,
    return_levels,
)
from extremebench.eva import gpd
from extremebench.ingest import VariableSchema, table_from_rows
from extremebench.pipeline import ExitCode, run_all
from extremebench.stats import pearson_matrix
from extremebench.synthetic import PV_SCHEMA, generate_pv_case

pytestmark = pytest.mark.acceptance

PERIODS = [1.0, 2.0, 5.0, 10.0, 25.0]


def _check(name, ok, detail=""):
    record_criterion(name, bool(ok), detail)
    assert ok, f"{name}: {detail}"


def _timestamps(n):
    return np.datetime64("2020-01-01T00:00", "s") + (np.arange(n) * 3600).astype("timedelta64[s]")


def test_pearson_oracle_equivalence():
    rng = np.random.default_rng(7)
    names = [f"v{i}" for i in range(6)]
    schema = VariableSchema(names[0], tuple(names[1:]))
    tables = []
    for _ in range(50):
        x = rng.normal(size=(100, 6)) @ rng.normal(size=(6, 6))
        tables.append(table_from_rows("t", schema, _timestamps(100), {v: x[:, i] for i, v in enumerate(names)}))
    t0 = time.perf_counter()
    mats = [pearson_matrix(t, names) for t in tables]
    elapsed = time.perf_counter() - t0
    worst = 0.0
    for t, m in zip(tables, mats):
        cols = [t.values[v].tolist() for v in names]
        for i in range(6):
            for j in range(6):
                worst = max(worst, abs(m.entries[i, j] - oracles.pearson(cols[i], cols[j])))
    _check("pearson oracle equivalence", worst <= 1e-12 and elapsed < 1.0,
           f"max error {worst:.2e}, {elapsed:.3f} s")


def test_gpd_parameter_recovery():
    t0 = time.perf_counter()
    rates = {}
    for k, xi in enumerate((-0.2, 0.0, 0.3)):
        hits = 0
        for trial in range(100):
            y = gpd.rvs(xi, 2.0, 5000, np.random.default_rng([k, trial]))
            fit = fit_gpd_mle(ExceedanceSet.from_excesses(y))
            hits += abs(fit.shape - xi) <= 0.05 and abs(fit.scale / 2.0 - 1) <= 0.05
        rates[xi] = hits / 100
    elapsed = time.perf_counter() - t0
    ok = all(r >= 0.95 for r in rates.values()) and elapsed < 30
    _check("GPD parameter recovery", ok,
           ", ".join(f"xi={xi:+.1f}: {r:.0%}" for xi, r in rates.items()) + f", {elapsed:.1f} s")


def test_return_level_anchor_and_monotonicity():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(500):
        xi, sigma, u, rate = rng.uniform(-0.9, 0.9), rng.uniform(0.01, 50), rng.uniform(-100, 100), rng.uniform(0.1, 400)
        for tail in ("low", "high"):
            fit = GPDFit(xi, sigma, u, tail, 100, 0.0)
            x = return_levels(fit, PoissonRate(rate), [1.0 / rate])[0].return_value
            worst = max(worst, abs(x - u))
    monotone = True
    grid = np.geomspace(0.01, 1000, 60).tolist()
    for k, xi in enumerate((-0.5, -0.2, 0.0, 0.3)):
        y = gpd.rvs(xi, 1.5, 400, np.random.default_rng([99, k]))
        for tail in ("low", "high"):
            exc = ExceedanceSet.from_excesses(y, threshold=3.0, tail=tail, span_years=5)
            fit = fit_gpd_mle(exc)
            x = np.array([e.return_value for e in return_levels(fit, PoissonRate.from_exceedances(exc), grid)])
            steps = np.diff(x)
            monotone &= bool(np.all(steps <= 0) if tail == "low" else np.all(steps >= 0))
    _check("return-level anchor", worst <= 1e-9 and monotone,
           f"max |x_T - u| at rate*T=1: {worst:.1e}, monotone: {monotone}")


def test_reflection_duality():
    d = generate_pv_case("d", 5, days=365)
    neg_values = dict(d.values)
    neg_values[PV_SCHEMA.dependent] = -d.dependent
    neg = table_from_rows("d", PV_SCHEMA, d.timestamps, neg_values)

    low = resolve_threshold(d, ThresholdSpec(25, "low"))
    high = ThresholdSpec(25, "high", threshold=-low.threshold)
    e_low, e_high = extract_exceedances(d, low), extract_exceedances(neg, high)
    same_rows = np.array_equal(low.extreme_mask(d.dependent), high.extreme_mask(neg.dependent))
    same_excess = e_low.excesses.tobytes() == e_high.excesses.tobytes()

    t_low = bootstrap_ci(e_low, PERIODS, n_boot=200, seed=3)
    t_high = bootstrap_ci(e_high, PERIODS, n_boot=200, seed=3)
    mirrored = all(
        a.return_value == -b.return_value and a.ci_lower == -b.ci_lower and a.ci_upper == -b.ci_upper
        for a, b in zip(t_low.entries, t_high.entries)
    )
    fits = (t_low.fit.shape, t_low.fit.scale) == (t_high.fit.shape, t_high.fit.scale)
    _check("reflection duality", same_rows and same_excess and mirrored and fits,
           f"rows {same_rows}, excesses {same_excess}, fit {fits}, levels {mirrored}")


def test_bootstrap_coverage_and_determinism():
    xi, sigma, n, span, u = 0.1, 2.0, 1000, 10.0, 5.0
    rate = n / span
    truth = u + sigma / xi * ((rate * np.array(PERIODS)) ** xi - 1)
    gen = np.random.default_rng(123)
    covered = np.zeros(len(PERIODS))
    t0 = time.perf_counter()
    for trial in range(200):
        exc = ExceedanceSet.from_excesses(gpd.rvs(xi, sigma, n, gen), threshold=u, tail="high", span_years=span)
        table = bootstrap_ci(exc, PERIODS, ci_level=0.95, n_boot=200, seed=trial)
        covered += [e.ci_min <= x <= e.ci_max for e, x in zip(table.entries, truth)]
    elapsed = time.perf_counter() - t0
    coverage = covered / 200

    exc = ExceedanceSet.from_excesses(gpd.rvs(xi, sigma, n, np.random.default_rng(5)), threshold=u, span_years=span)
    a = bootstrap_ci(exc, PERIODS, n_boot=200, seed=42)
    b = bootstrap_ci(exc, PERIODS, n_boot=200, seed=42)
    deterministic = a.entries == b.entries and a.replicate_levels.tobytes() == b.replicate_levels.tobytes()
    ok = coverage.min() >= 0.90 and deterministic and elapsed < 120
    _check("bootstrap coverage", ok,
           "coverage by period " + " ".join(f"{c:.3f}" for c in coverage)
           + f", deterministic {deterministic}, {elapsed:.1f} s")


def test_fit_quality_discrimination():
    y = gpd.rvs(0.2, 1.0, 10000, np.random.default_rng(21))
    exc = ExceedanceSet.from_excesses(y)
    fit = fit_gpd_mle(exc)
    good = fit_diagnostics(exc, fit).r_squared
    wrong = GPDFit(-0.4, fit.scale, fit.threshold, fit.tail, fit.n_excesses, 0.0)
    bad = fit_diagnostics(exc, wrong).r_squared
    _check("fit-quality discrimination", good >= 0.99 and bad < good,
           f"r2 fitted {good:.5f}, mismatched {bad:.5f}")


def _random_delta(rng, k=6):
    d = np.zeros((k, k))
    d[np.triu_indices(k, 1)] = rng.uniform(-1, 1, k * (k - 1) // 2)
    d = d + d.T
    return CorrelationDelta(tuple(f"v{i}" for i in range(k)), d, np.zeros((k, k), bool))


def _labels(delta):
    return classify(delta, resolve_thresholds(delta)).as_strings()


def test_disc_oracle_equivalence():
    rng = np.random.default_rng(31)
    mismatches = 0
    shift_changes = 0
    for _ in range(200):
        delta = _random_delta(rng)
        want, _, _ = oracles.disc_labels(delta.delta.tolist())
        got = _labels(delta)
        mismatches += got != want
        shifted = CorrelationDelta(delta.variables, delta.delta + 0.37, delta.undefined_mask)
        shift_changes += _labels(shifted) != got
    flat = CorrelationDelta(tuple("abcdef"), np.full((6, 6), 0.3), np.zeros((6, 6), bool))
    all_ns = all(x == "NotSignificant" for row in _labels(flat) for x in row)
    _check("DISC oracle equivalence", mismatches == 0 and shift_changes == 0 and all_ns,
           f"{mismatches} oracle mismatches, {shift_changes} shift changes, all-equal NotSignificant {all_ns}")


def test_exceedance_rate_anchor():
    f = exceedance_factor([ReturnLevelEntry(t, 0.0, 0.0, 0.0) for t in (1.0, 2.0, 5.0, 10.0, 25.0, 1000.0)])
    zero = all(v == 0.0 for v in f.values())
    _check("exceedance-rate anchor", bare_rate(5) == 0.2 and zero, f"1/5 -> {bare_rate(5)!r}, zero level -> {zero}")


def test_benchmark_hand_oracle():
    weights = dict(SUGGESTED_WEIGHTS)
    order = ["humidity", "temperature", "cloudcover", "windspeed", "solar", "diffuse_solar"]
    profile = [weights[v] for v in order]
    c = dict(zip(order, (0.2, 0.4, 0.6, 0.8, 1.0, 0.5)))
    # 0.05*0.2 + 0.1*0.4 + 0.2*0.6 + 0.05*0.8 + 0.4*1.0 + 0.2*0.5 = 0.71; 0.5 * 0.35 * 0.71
    hand = 0.12425
    stats = ExtremeConditionStats("mean", c, {k: math.nan for k in c}, 10, 0)
    cfg = BenchmarkConfig(weights, return_periods=(1.0,))
    factors = exceedance_factor([ReturnLevelEntry(1.0, 0.35, 0.35, 0.35)])
    got = benchmark_scores(stats, cfg, 0.5, factors).rv[0]

    rng = np.random.default_rng(41)
    worst = 0.0
    for _ in range(500):
        counts = {f"c{i}": int(v) for i, v in enumerate(rng.integers(0, 10_000, rng.integers(1, 12)))}
        if sum(counts.values()) == 0:
            continue
        worst = max(worst, abs(math.fsum(historical_share(counts).values()) - 1.0))
    ok = profile == [0.05, 0.1, 0.2, 0.05, 0.4, 0.2] and abs(got - hand) <= 1e-9 and worst <= 1e-9
    _check("benchmark hand-oracle", ok, f"B_rv(1) = {got!r} vs {hand}, share-sum error {worst:.1e}")


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_end_to_end_determinism(demo_config_path, tmp_path):
    cfg = load_config(demo_config_path)
    t0 = time.perf_counter()
    res = run_all(cfg, tmp_path / "first")
    elapsed = time.perf_counter() - t0
    run_all(load_config(demo_config_path), tmp_path / "second")
    first, second = _tree(tmp_path / "first"), _tree(tmp_path / "second")
    identical = first == second

    required = []
    for case in ("site_a", "site_b"):
        required += [f"{case}/step1_synthesis.json", f"{case}/step2_eva.json", f"{case}/step3_circumstance.json",
                     f"{case}/return_levels.csv", f"{case}/disc_heatmap.svg"]
    required.append("benchmark_series.svg")
    missing = [p for p in required if p not in first]
    header_ok = all(
        first[f"{c}/return_levels.csv"].decode().splitlines()[0] == "Return Period,Return Value,Lower CI,Upper CI"
        for c in ("site_a", "site_b") if f"{c}/return_levels.csv" in first
    )
    log_x = b'data-x-scale="log"' in first.get("benchmark_series.svg", b"")
    ok = res.exit_code == ExitCode.OK and elapsed < 60 and identical and not missing and header_ok and log_x
    _check("end-to-end determinism", ok,
           f"exit {int(res.exit_code)}, {elapsed:.1f} s, identical {identical}, missing {missing}, "
           f"header {header_ok}, log x {log_x}")
