import csv
import json
import os
from dataclasses import replace

import pytest

from avtestgen.behaviours import BehaviourKind, BehaviourParams
from avtestgen.gridworld import GridConfig
from avtestgen.harness import BEHAVIOUR_ORDER, ExperimentConfig, run_test, run_tests, spawn_mask, sweep
from avtestgen.reporting import (
    PLOT_FILES,
    SUMMARY_COLUMNS,
    ReportError,
    config_from_dict,
    config_to_dict,
    emit_plot_data,
    read_metadata,
    read_summary,
    read_trace,
    replay_trace,
    spawn_mask_text,
    summary_csv,
    write_summary,
    write_trace,
)
from avtestgen.verdict import Outcome

RANDOM = ExperimentConfig(behaviour=BehaviourParams(kind=BehaviourKind.RANDOM), n_agents=1)


@pytest.fixture(scope="module")
def small_sweep():
    return sweep(ExperimentConfig(runs=10, base_seed=4), BEHAVIOUR_ORDER, range(1, 21))


def _five_tick_result():
    for i in range(500):
        r = run_test(RANDOM, i)
        if r.ticks_elapsed == 5:
            return r
    raise AssertionError("no five-tick test in the first 500 runs")


def test_trace_one_agent_five_ticks(tmp_path):
    result = _five_tick_result()
    path = write_trace([result], tmp_path / "t.ndjson", RANDOM)
    lines = path.read_text().splitlines()
    assert len(lines) == 10
    first = json.loads(lines[0])
    assert set(first) == {"run_index", "tick", "entity_id", "entity_kind", "column", "row", "action", "score_delta", "event"}
    assert first["entity_kind"] == "av" and first["tick"] == 1
    assert read_trace(path) == result.trace


def test_trace_files_byte_identical(tmp_path):
    cfg = replace(RANDOM, n_agents=4, runs=20, base_seed=8)
    a = write_trace(run_tests(cfg, record_trace=True), tmp_path / "a.ndjson", cfg)
    b = write_trace(run_tests(cfg, record_trace=True), tmp_path / "b.ndjson", cfg)
    assert a.read_bytes() == b.read_bytes()


def test_successful_trace_has_one_trigger_line(tmp_path):
    cfg = ExperimentConfig(n_agents=3, base_seed=1)
    result = next(r for r in (run_test(cfg, i) for i in range(50)) if r.outcome is Outcome.SUCCESSFUL)
    path = write_trace([result], tmp_path / "t.ndjson", cfg)
    events = [json.loads(line)["event"] for line in path.read_text().splitlines()]
    assert events.count("trigger") == 1


def test_replay_from_trace_file(tmp_path):
    cfg = ExperimentConfig(behaviour=BehaviourParams(kind=BehaviourKind.CONSTRAINED_RANDOM), n_agents=6, runs=15, base_seed=21)
    results = run_tests(cfg, record_trace=True)
    path = write_trace(results, tmp_path / "t.ndjson", cfg)
    replayed = replay_trace(path)
    assert [r.trace for r in replayed] == [r.trace for r in results]
    assert [r.outcome for r in replayed] == [r.outcome for r in results]


def test_config_round_trip():
    cfg = ExperimentConfig(n_agents=7, runs=3, base_seed=99, grid=GridConfig(zone_spans_lane=False), stop_on_unavoidable=True)
    assert config_from_dict(json.loads(json.dumps(config_to_dict(cfg)))) == cfg


# -- summary ----------------------------------------------------------------


def test_summary_full_sweep_shape(tmp_path, small_sweep):
    path = write_summary(small_sweep, tmp_path / "summary.csv", ExperimentConfig(runs=10, base_seed=4))
    lines = path.read_text().splitlines()
    assert len(lines) == 81
    assert lines[0].split(",") == list(SUMMARY_COLUMNS)
    rows = list(csv.DictReader(lines))
    for row in rows:
        assert 0.0 <= float(row["accuracy"]) <= 1.0
    meta = read_metadata(path)
    assert meta["base_seed"] == 4 and meta["summary_schema"] == 1
    assert meta["config"]["runs"] == 10


def test_empty_summary_is_header_only(tmp_path):
    path = write_summary([], tmp_path / "s.csv")
    assert path.read_text() == ",".join(SUMMARY_COLUMNS) + "\n"
    assert read_summary(path) == []


def test_summary_round_trip(tmp_path, small_sweep):
    path = write_summary(small_sweep, tmp_path / "s.csv")
    back = read_summary(path)
    assert len(back) == len(small_sweep)
    for orig, got in zip(small_sweep, back):
        assert (got.behaviour, got.n_agents, got.successful) == (orig.behaviour, orig.n_agents, orig.successful)
        for name in ("accuracy", "mean_score", "score_ci95", "combined_score", "mean_t_c", "mean_t_g", "t_g_ci95"):
            a, b = getattr(orig, name), getattr(got, name)
            if a is None:
                assert b is None
            else:
                assert b == pytest.approx(a, rel=5e-6, abs=1e-12)


def test_summary_csv_can_drop_columns(small_sweep):
    text = summary_csv(small_sweep[:2], drop=("mean_t_c_seconds",))
    assert "mean_t_c_seconds" not in text.splitlines()[0]


# -- plot data --------------------------------------------------------------


def test_plot_files(tmp_path, small_sweep):
    paths = emit_plot_data(small_sweep, tmp_path)
    assert sorted(p.name for p in paths) == sorted(name for name, _ in PLOT_FILES.values())
    for p in paths:
        rows = list(csv.reader(p.read_text().splitlines()))
        assert len(rows) == 21
        assert [r[0] for r in rows[1:]] == [str(n) for n in range(1, 21)]
    score = list(csv.reader((tmp_path / "score.csv").read_text().splitlines()))
    assert score[0] == ["nA", "random", "random_ci95", "constrained_random", "constrained_random_ci95",
                        "proximity", "proximity_ci95", "election", "election_ci95"]
    tg = list(csv.reader((tmp_path / "tg.csv").read_text().splitlines()))
    assert len(tg[0]) == 9


def test_plot_missing_cells_are_empty(tmp_path, small_sweep):
    partial = [s for s in small_sweep if not (s.behaviour is BehaviourKind.ELECTION and s.n_agents == 3)]
    emit_plot_data(partial, tmp_path)
    rows = list(csv.reader((tmp_path / "accuracy.csv").read_text().splitlines()))
    assert rows[3][0] == "3" and rows[3][4] == ""


def test_plot_rejects_empty_input(tmp_path):
    with pytest.raises(ValueError):
        emit_plot_data([], tmp_path)


# -- failures ---------------------------------------------------------------


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_directory_leaves_nothing(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(0o500)
    try:
        with pytest.raises(ReportError):
            write_summary([], locked / "s.csv")
        assert list(locked.iterdir()) == []
    finally:
        locked.chmod(0o700)


def test_write_failure_removes_partial_file(tmp_path, monkeypatch, small_sweep):
    import avtestgen.reporting as reporting

    def boom(src, dst):
        raise OSError(28, "No space left on device")

    monkeypatch.setattr(reporting.os, "replace", boom)
    with pytest.raises(ReportError):
        write_summary(small_sweep, tmp_path / "s.csv")
    assert list(tmp_path.iterdir()) == []


def test_write_into_a_file_path_fails_cleanly(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("x")
    with pytest.raises(ReportError):
        write_summary([], blocker / "s.csv")


# -- spawn mask -------------------------------------------------------------


def test_spawn_mask_text():
    grid = GridConfig()
    text = spawn_mask_text(spawn_mask(grid), grid).splitlines()
    assert len(text) == 66
    assert text[0].endswith("##........##")
    assert text[40].split()[1][1] == "o"
