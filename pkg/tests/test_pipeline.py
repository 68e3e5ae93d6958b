import csv
import json
import shutil

import numpy as np
import pytest

from extremebench import cli
from extremebench.config import ConfigError, load_config, parse_config
from extremebench.errors import WeightMismatch
from extremebench.pipeline import ExitCode, Stage, compute, run_all, run_synthesis
from extremebench.synthetic import PV_SCHEMA, generate_pv_case


def _cfg(workspace, **edits):
    raw = json.loads((workspace / "fast-config.json").read_text())
    for dotted, v in edits.items():
        node = raw
        *parents, leaf = dotted.split(".")
        for p in parents:
            node = node[p]
        node[leaf] = v
    return raw


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_defaults(demo_workspace):
    raw = _cfg(demo_workspace)
    for key in ("threshold", "disc", "window"):
        raw.pop(key)
    raw["eva"] = {"n_boot": 100}
    cfg = parse_config(raw, demo_workspace)
    assert (cfg.percentile, cfg.tail, cfg.q_hi, cfg.q_lo) == (25.0, "low", 90.0, 10.0)
    assert cfg.return_periods == (1.0, 2.0, 5.0, 10.0, 25.0)
    assert cfg.ci_level == 0.95 and cfg.min_excesses == 10
    assert cfg.window.start_time.hour == 13 and cfg.window.end_time.hour == 16
    assert cfg.cases[0].path == (demo_workspace / "site_a.csv").resolve()


def test_seed_is_mandatory(demo_workspace):
    raw = _cfg(demo_workspace)
    del raw["seed"]
    with pytest.raises(ConfigError):
        parse_config(raw, demo_workspace)


def test_unknown_weight_variable_fails_before_work(demo_workspace, tmp_path):
    raw = _cfg(demo_workspace)
    raw["benchmark"]["weights"]["pressure"] = raw["benchmark"]["weights"].pop("humidity")
    with pytest.raises(WeightMismatch):
        parse_config(raw, demo_workspace)
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(raw))
    out = tmp_path / "out"
    assert cli.main(["all", "--config", str(p), "--out", str(out)]) == ExitCode.VALIDATION
    assert not out.exists()


def test_overrides_win(demo_workspace):
    cfg = load_config(demo_workspace / "fast-config.json",
                      {"threshold.tail": "high", "eva.return_periods": [1, 10], "eva.n_boot": 200, "seed": 5})
    assert cfg.tail == "high" and cfg.return_periods == (1.0, 10.0) and cfg.n_boot == 200 and cfg.seed == 5


def test_bad_values_rejected(demo_workspace):
    for key, v in [("threshold.percentile", 0), ("threshold.tail", "mid"), ("eva.ci_level", 1.5),
                   ("eva.n_boot", 10), ("disc.q_lo", 70), ("eva.return_periods", [1, -2])]:
        with pytest.raises(ConfigError):
            parse_config(_cfg(demo_workspace, **{key: v}), demo_workspace)


def test_single_case_synthesis(demo_workspace, tmp_path):
    raw = _cfg(demo_workspace)
    raw["cases"] = raw["cases"][:1]
    cfg = parse_config(raw, demo_workspace)
    res = run_synthesis(cfg, tmp_path / "out")
    assert res.exit_code == ExitCode.OK
    doc = json.loads((tmp_path / "out" / "site_a" / "step1_synthesis.json").read_text())
    assert doc["rows_total"] == 10220 and doc["rows_filtered"] == 2190
    assert not (tmp_path / "out" / "site_a" / "step2_eva.json").exists()


def test_single_case_benchmark(demo_workspace, tmp_path):
    raw = _cfg(demo_workspace)
    raw["cases"] = raw["cases"][:1]
    res = run_all(parse_config(raw, demo_workspace), tmp_path / "out")
    assert res.exit_code == ExitCode.OK
    assert res.reports["site_a"].scores.share == 1.0
    doc = json.loads((tmp_path / "out" / "benchmark.json").read_text())
    assert doc["verdict"]["message"] == "single case, no comparison"


def test_two_stage_one_reports(demo_workspace, tmp_path):
    res = run_synthesis(load_config(demo_workspace / "fast-config.json"), tmp_path / "o")
    assert sorted(p.name for p in (tmp_path / "o").glob("*/step1_synthesis.json")) == ["step1_synthesis.json"] * 2
    assert len(res.cases) == 2


def test_identical_cases_tie(demo_workspace, tmp_path):
    shutil.copy(demo_workspace / "site_a.csv", demo_workspace / "twin.csv")
    raw = _cfg(demo_workspace)
    raw["cases"] = [{"id": "one", "path": "site_a.csv"}, {"id": "two", "path": "twin.csv"}]
    res = run_all(parse_config(raw, demo_workspace), tmp_path / "out")
    assert res.verdict.tie and res.verdict.most_sensitive is None
    assert res.reports["one"].scores.rv == res.reports["two"].scores.rv


def test_too_few_excesses_surfaces_per_case(tmp_path, demo_workspace):
    t = generate_pv_case("tiny", 1, days=2)
    from extremebench.ingest import write_csv

    write_csv(t, demo_workspace / "tiny.csv")
    raw = _cfg(demo_workspace)
    raw["cases"].append({"id": "tiny", "path": "tiny.csv"})
    res = compute(parse_config(raw, demo_workspace), Stage.EVA)
    bad = {c.case_id: c for c in res.cases}["tiny"]
    assert bad.failed_stage is Stage.EVA and "at least" in str(bad.error)
    assert res.exit_code == ExitCode.PARTIAL


def test_partial_failure_names_bad_case(demo_workspace, tmp_path, capsys):
    lines = (demo_workspace / "site_b.csv").read_text().splitlines()
    lines[5] = lines[5].replace(",", ",oops,", 1).rsplit(",", 1)[0]
    (demo_workspace / "site_b.csv").write_text("\n".join(lines) + "\n")
    out = tmp_path / "out"
    code = cli.main(["all", "--config", str(demo_workspace / "fast-config.json"), "--out", str(out)])
    assert code == ExitCode.PARTIAL
    err = capsys.readouterr().err
    assert "site_b" in err and "row 5" in err
    assert (out / "site_a" / "report.json").exists()
    summary = json.loads((out / "run-summary.json").read_text())
    assert [c["status"] for c in summary["cases"]] == ["ok", "failed"]


def test_all_cases_failing(demo_workspace, tmp_path):
    raw = _cfg(demo_workspace)
    raw["cases"] = [{"id": "ghost", "path": "missing.csv"}]
    res = run_all(parse_config(raw, demo_workspace), tmp_path / "out")
    assert res.exit_code == ExitCode.COMPUTATION


def test_outputs_and_stage_composition(demo_workspace, tmp_path):
    cfg_path = str(demo_workspace / "fast-config.json")
    assert cli.main(["all", "--config", cfg_path, "--out", str(tmp_path / "all")]) == 0
    for cmd in ("synth", "eva", "circ", "bench"):
        assert cli.main([cmd, "--config", cfg_path, "--out", str(tmp_path / "staged")]) == 0
    assert _tree(tmp_path / "all") == _tree(tmp_path / "staged")
    # rerun from the echoed configuration
    echo = tmp_path / "all" / "config-resolved.json"
    assert cli.main(["all", "--config", str(echo), "--out", str(tmp_path / "echo")]) == 0
    assert _tree(tmp_path / "all") == _tree(tmp_path / "echo")


def test_disc_outputs_are_six_by_six(demo_workspace, tmp_path):
    run_all(load_config(demo_workspace / "fast-config.json"), tmp_path)
    with open(tmp_path / "site_a" / "disc_matrix.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 7 and rows[0][1:] == list(PV_SCHEMA.companions)
    assert (tmp_path / "site_a" / "disc_heatmap.svg").exists()


def test_return_table_deterministic(demo_workspace, tmp_path):
    cfg = load_config(demo_workspace / "fast-config.json")
    a, b = compute(cfg, Stage.EVA), compute(cfg, Stage.EVA)
    for ca, cb in zip(a.cases, b.cases):
        assert ca.report.return_table.entries == cb.report.return_table.entries
        assert len(ca.report.return_table.entries) == 5


def test_cli_flag_overrides_are_echoed(demo_workspace, tmp_path):
    out = tmp_path / "o"
    code = cli.main(["eva", "--config", str(demo_workspace / "fast-config.json"), "--out", str(out),
                     "--periods", "1,10,100", "--ci", "0.9", "--boot", "120", "--seed", "3", "--tail", "low",
                     "--percentile", "20"])
    assert code == 0
    echo = json.loads((out / "config-resolved.json").read_text())
    assert echo["eva"]["return_periods"] == [1, 10, 100] and echo["eva"]["ci_level"] == 0.9
    assert echo["eva"]["n_boot"] == 120 and echo["seed"] == 3 and echo["threshold"]["percentile"] == 20
    doc = json.loads((out / "site_a" / "step2_eva.json").read_text())
    assert doc["return_levels"]["seed"] == 3 and len(doc["return_levels"]["entries"]) == 3


def test_extreme_equal_full_gives_no_significance():
    from extremebench.disc import disc_threshold, Label
    from extremebench.stats import pearson_matrix

    t = generate_pv_case("x", 2, days=20)
    m = pearson_matrix(t, PV_SCHEMA.companions)
    _, _, cls = disc_threshold(m, m)
    assert all(label is Label.NOT_SIGNIFICANT for label in cls.labels.ravel())
    assert np.all(np.isfinite(m.entries))
