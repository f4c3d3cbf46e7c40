import json
import math
import os

import numpy as np
import pytest

from setlp.bodies import magnitude
from setlp.cli import ConfigError, load_config, main
from setlp.grids import DyadicDomain
from setlp.harness import (
    DEFAULT_TRIALS,
    SUITE_RUNNERS,
    SUITES,
    ExperimentConfig,
    ExperimentReport,
    _jsonable,
    run_bodies_selftest,
    run_endpoint_bounds,
    run_marcinkiewicz,
    run_riesz_thorin,
    thread_count,
    trial_field,
)


def test_config_validation():
    with pytest.raises(ValueError, match="seed"):
        ExperimentConfig(seed=-1)
    with pytest.raises(ValueError, match="level"):
        ExperimentConfig(level=0)
    with pytest.raises(ValueError, match="level"):
        ExperimentConfig(level=11)
    with pytest.raises(ValueError, match="trials"):
        ExperimentConfig(trials=0)
    with pytest.raises(ValueError, match="alpha"):
        ExperimentConfig(alpha=1.0)
    with pytest.raises(ValueError, match="interpolation"):
        ExperimentConfig(ts=(0.5, 1.0))
    with pytest.raises(ValueError, match="direction"):
        ExperimentConfig(directions=4)
    with pytest.raises(ValueError, match="fixtures"):
        ExperimentConfig(fixtures=("euclidean", "bogus"))


def test_config_trial_counts():
    cfg = ExperimentConfig()
    assert cfg.trial_count("marcinkiewicz") == DEFAULT_TRIALS["marcinkiewicz"]
    assert ExperimentConfig(trials=3).trial_count("riesz-thorin") == 3
    assert set(SUITES) < set(SUITE_RUNNERS)


def test_trial_field_deterministic_and_kinds():
    domain = DyadicDomain(1, 4)
    one = trial_field(np.random.default_rng([5, 0]), domain, 2, "smooth")
    two = trial_field(np.random.default_rng([5, 0]), domain, 2, "smooth")
    assert one.to_dict() == two.to_dict()
    spike = trial_field(np.random.default_rng(6), domain, 1, "spike")
    mags = sorted(magnitude(c) for c in spike.cells)
    assert mags[-1] > 1.0 and mags[-2] < 0.01  # one hot cell over a tiny floor
    board = trial_field(np.random.default_rng(6), domain, 1, "checkerboard")
    mags = np.array([magnitude(c) for c in board.cells])
    # scales alternate 4:1 by parity; the random bodies blur but keep the tilt
    assert mags[0::2].mean() > 2.0 * mags[1::2].mean()
    with pytest.raises(ValueError, match="kind"):
        trial_field(np.random.default_rng(6), domain, 1, "nope")


def test_jsonable_sanitizes_numpy_and_infinities():
    blob = {
        "a": np.float64(1.5),
        "b": np.bool_(True),
        "c": [np.int64(3), math.inf],
        "d": {"e": -math.inf},
    }
    got = _jsonable(blob)
    assert got == {"a": 1.5, "b": True, "c": [3, "inf"], "d": {"e": "-inf"}}
    assert isinstance(got["b"], bool) and isinstance(got["c"][0], int)
    json.dumps(got)


def test_report_serialization_round_trip():
    rep = ExperimentReport(
        suite="demo", config={"seed": 1}, records=[{"z": 1, "a": {"y": 2.0, "x": 3}}],
        aggregate={"worst": np.float64(0.5)}, passed=True, wall_clock=9.9)
    data = json.loads(rep.to_json())
    assert "wall_clock" not in data
    assert data["passed"] is True and data["aggregate"]["worst"] == 0.5
    assert rep.to_json().endswith("\n")
    rows = rep.csv_rows()
    assert rows[0] == ("record", "field", "value")
    assert ("0", "a.x", "3") in rows and ("aggregate", "worst", "0.5") in rows


def test_marcinkiewicz_small_run():
    cfg = ExperimentConfig(seed=3, level=3, trials=4, ts=(0.5,))
    rep = run_marcinkiewicz(cfg)
    assert rep.passed
    assert len(rep.records) == 4
    agg = rep.aggregate
    assert agg["min_slack"] > 0.0
    worst = max(r["ratios"]["0.5"] for r in rep.records)
    assert agg["max_ratio"]["0.5"] == pytest.approx(worst, rel=1e-12)
    assert agg["constants"]["0.5"] == pytest.approx(2.0 * 2.0 ** 0.25, rel=1e-12)


def test_endpoint_small_run():
    cfg = ExperimentConfig(seed=3, level=3, trials=3)
    rep = run_endpoint_bounds(cfg)
    assert rep.passed
    assert all(r["slack"] >= -1e-9 for r in rep.records)
    alphas = {r["alpha"] for r in rep.records}
    assert len(alphas) == 3  # round-robin over the three endpoint exponents


def test_riesz_thorin_small_run():
    cfg = ExperimentConfig(seed=3, level=3, fixtures=("euclidean", "rotated"),
                           directions=60)
    rep = run_riesz_thorin(cfg)
    assert rep.passed
    names = {r["fixture"] for r in rep.records}
    assert names == {"euclidean", "rotated"}
    for r in rep.records:
        if r["fixture"] == "euclidean":
            assert max(r["sup_ratios"]) <= 1.0 + 1e-9


def test_bodies_selftest_runs():
    rep = run_bodies_selftest(ExperimentConfig(seed=3, level=3))
    assert rep.passed
    assert rep.aggregate["checks"] == len(rep.records)
    assert all(r["ok"] for r in rep.records)


def test_thread_count_env(monkeypatch):
    monkeypatch.delenv("SETLP_THREADS", raising=False)
    assert thread_count() == 1
    monkeypatch.setenv("SETLP_THREADS", "4")
    assert thread_count() == 4
    monkeypatch.setenv("SETLP_THREADS", "0")
    assert thread_count() == 1


def test_reports_identical_across_thread_counts(monkeypatch):
    cfg = ExperimentConfig(seed=11, level=3, trials=6, ts=(0.5,))
    monkeypatch.setenv("SETLP_THREADS", "1")
    serial = run_marcinkiewicz(cfg).to_json()
    monkeypatch.setenv("SETLP_THREADS", "4")
    threaded = run_marcinkiewicz(cfg).to_json()
    assert serial == threaded


def test_cli_runs_suite_and_writes_report(tmp_path, capsys):
    out = tmp_path / "reports"
    code = main(["marcinkiewicz", "--trials", "2", "--level", "3",
                 "--seed", "1", "--out", str(out)])
    assert code == 0
    assert "marcinkiewicz: PASS" in capsys.readouterr().out
    data = json.loads((out / "marcinkiewicz.json").read_text())
    assert data["suite"] == "marcinkiewicz"
    assert data["config"]["seed"] == 1


def test_cli_csv_and_plot_outputs(tmp_path):
    out = tmp_path / "r"
    code = main(["marcinkiewicz", "--trials", "2", "--level", "3",
                 "--out", str(out), "--format", "csv", "--emit-plot-data"])
    assert code == 0
    assert (out / "marcinkiewicz.csv").exists()
    plot = (out / "marcinkiewicz_plot.csv").read_text().splitlines()
    assert plot[0] == "x,series,value"


def test_cli_config_file_and_flag_precedence(tmp_path, monkeypatch):
    cfg_out = tmp_path / "from_config"
    env_out = tmp_path / "from_env"
    flag_out = tmp_path / "from_flag"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 2, "level": 3, "trials": 2,
                               "out": str(cfg_out)}))
    monkeypatch.setenv("SETLP_OUT", str(env_out))
    assert main(["marcinkiewicz", "--config", str(cfg)]) == 0
    assert (env_out / "marcinkiewicz.json").exists() and not cfg_out.exists()
    assert main(["marcinkiewicz", "--config", str(cfg), "--out", str(flag_out)]) == 0
    assert (flag_out / "marcinkiewicz.json").exists()


def test_cli_config_errors_are_line_anchored(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "seed": 1,\n  "level": 99\n}\n')
    assert main(["marcinkiewicz", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert f"{bad}:3: level must be an integer" in err

    unknown = tmp_path / "unknown.json"
    unknown.write_text('{\n  "bogus_key": 1\n}\n')
    assert main(["marcinkiewicz", "--config", str(unknown)]) == 2
    assert "unknown config key 'bogus_key'" in capsys.readouterr().err

    broken = tmp_path / "broken.json"
    broken.write_text('{\n  "seed": oops\n}\n')
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(str(broken))
    assert main(["marcinkiewicz", "--config", str(tmp_path / "missing.json")]) == 2


def test_cli_rejects_unknown_suite():
    with pytest.raises(SystemExit) as exc:
        main(["not-a-suite"])
    assert exc.value.code == 2
