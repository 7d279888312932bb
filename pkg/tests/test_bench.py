"""Harness tests: metric formulas, seed/goal derivation, scenario configs, CSV
round trips, and worker-count-independent suite determinism."""

import math
from dataclasses import replace

import numpy as np
import pytest

from smppi import bench
from smppi.planner import EpisodeRecord

TOL = 1e-12


def record(success=True, t_task=1.0, t_comp=(), seed=0):
    return EpisodeRecord(
        success=success,
        t_task=t_task,
        t_comp=tuple(t_comp),
        failure_reason="none" if success else "timeout",
        seed=seed,
    )


def tiny_config(**overrides):
    defaults = dict(
        task="ball",
        batch_sizes=(8, 16),
        n_runs=2,
        master_seed=0,
        horizon=8,
        n_iterations=1,
        n_elite=4,
        timeout_s=2.0,
    )
    defaults.update(overrides)
    return bench.ScenarioConfig(**defaults)


def counter_clock_factory():
    def factory():
        state = {"t": 0.0}

        def clock():
            state["t"] += 0.125
            return state["t"]

        return clock

    return factory


# -- metrics ------------------------------------------------------------------


def test_success_rate_hand_value():
    records = [record(success=i < 18) for i in range(20)]
    m = bench.compute_metrics(records)
    assert m.n_runs == 20 and m.n_success == 18
    assert m.success_rate_pct == 90.0


def test_task_time_stats_hand_values():
    m = bench.compute_metrics([record(t_task=0.05), record(t_task=0.07)])
    assert m.t_task_mean_s == pytest.approx(0.06, abs=TOL)
    assert m.t_task_std_s == pytest.approx(0.01, abs=TOL)
    m = bench.compute_metrics([record(t_task=4.0)] * 5)
    assert m.t_task_mean_s == 4.0 and m.t_task_std_s == 0.0


def test_comp_time_pools_all_steps():
    records = [record(t_comp=(0.1,)), record(t_comp=(0.3,))]
    m = bench.compute_metrics(records)
    assert m.t_comp_mean_s == pytest.approx(0.2, abs=TOL)
    assert m.t_comp_std_s == pytest.approx(0.1, abs=TOL)
    # uneven step counts: the pool weights runs by their number of steps
    records = [record(t_comp=(0.1, 0.2)), record(t_comp=(0.6,))]
    m = bench.compute_metrics(records)
    assert m.t_comp_mean_s == pytest.approx(0.3, abs=TOL)
    assert m.t_comp_std_s == pytest.approx(np.std([0.1, 0.2, 0.6]), abs=TOL)


def test_zero_step_records_give_nan_comp_stats():
    m = bench.compute_metrics([record(), record()])
    assert math.isnan(m.t_comp_mean_s) and math.isnan(m.t_comp_std_s)
    assert m.t_task_mean_s == 1.0


def test_metrics_ignore_record_order():
    rng = np.random.default_rng(0)
    records = [
        record(success=bool(rng.integers(2)), t_task=float(rng.uniform(1, 9)), t_comp=tuple(rng.uniform(0.1, 0.4, 3)))
        for _ in range(10)
    ]
    a = bench.compute_metrics(records)
    b = bench.compute_metrics(records[::-1])
    assert (a.n_success, a.success_rate_pct) == (b.n_success, b.success_rate_pct)
    assert a.t_task_mean_s == pytest.approx(b.t_task_mean_s, rel=1e-12)
    assert a.t_comp_std_s == pytest.approx(b.t_comp_std_s, rel=1e-12)


def test_metrics_reject_empty_input():
    with pytest.raises(ValueError, match="non-empty"):
        bench.compute_metrics([])


# -- seed and goal derivation -------------------------------------------------


def test_derived_seeds_are_distinct_and_stable():
    seeds = {
        (m, b, r): bench.derive_seed(m, b, r)
        for m in (0, 1)
        for b in (32, 64, 256)
        for r in range(20)
    }
    assert len(set(seeds.values())) == len(seeds)
    for (m, b, r), s in seeds.items():
        assert s == bench.derive_seed(m, b, r)
        assert 0 <= s < 2**63


def test_episode_goals_are_stable_and_vary_by_run():
    cfg = tiny_config()
    a = bench.episode_goal(cfg, 8, 0)
    assert np.array_equal(a, bench.episode_goal(cfg, 8, 0))
    assert not np.array_equal(a, bench.episode_goal(cfg, 8, 1))
    assert not np.array_equal(a, bench.episode_goal(cfg, 16, 0))
    # default box comes from the task kind
    assert 0.04 <= a[0] <= 0.16 and a[1] == 0.0 and 0.50 <= a[2] <= 0.60


def test_custom_goal_box_overrides_task_box():
    cfg = tiny_config(goal_low=(0.0, 0.0, 0.9), goal_high=(0.01, 0.0, 0.95))
    for run in range(5):
        g = bench.episode_goal(cfg, 8, run)
        assert 0.0 <= g[0] <= 0.01 and g[1] == 0.0 and 0.9 <= g[2] <= 0.95


# -- scenario configs ---------------------------------------------------------


def test_config_defaults_match_benchmark_scale():
    cfg = bench.ScenarioConfig(task="tray")
    assert cfg.batch_sizes == (256, 512, 1024)
    assert cfg.n_runs == 20 and cfg.master_seed == 0
    assert cfg.horizon == 20 and cfg.dt == 0.1 and cfg.execute_steps == 2
    assert cfg.n_iterations == 2 and cfg.n_elite == 64
    assert cfg.timeout_s == 120.0 and cfg.time_budget_s is None


def test_config_round_trips_through_json(tmp_path):
    cfg = tiny_config(goal_low=(0.0, 0.0, 0.5), goal_high=(0.1, 0.0, 0.6))
    path = tmp_path / "scenario.json"
    cfg.save(path)
    assert bench.ScenarioConfig.load(path) == cfg
    text = path.read_text()
    assert text.endswith("\n") and text == cfg.dumps()
    keys = [line.split('"')[1] for line in text.splitlines() if '":' in line]
    assert keys == sorted(keys)


def test_config_schema_rejects_bad_documents():
    good = tiny_config().to_dict()
    bad_cases = [
        {**good, "task": "juggle"},
        {**good, "batch_sizes": []},
        {**good, "n_runs": 0},
        {**good, "eta": 1.5},
        {**good, "schema_version": 99},
        {**good, "surprise": 1},
        {k: v for k, v in good.items() if k != "master_seed"},
    ]
    for data in bad_cases:
        with pytest.raises(bench.ConfigError):
            bench.ScenarioConfig.from_dict(data)


def test_config_rejects_inconsistent_goal_box():
    with pytest.raises(bench.ConfigError, match="together"):
        tiny_config(goal_low=(0.0, 0.0, 0.5))
    with pytest.raises(bench.ConfigError, match="exceed"):
        tiny_config(goal_low=(0.2, 0.0, 0.5), goal_high=(0.1, 0.0, 0.6))


def test_config_load_errors(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(bench.ConfigError, match="not valid JSON"):
        bench.ScenarioConfig.load(path)
    path.write_text("[1, 2]")
    with pytest.raises(bench.ConfigError, match="JSON object"):
        bench.ScenarioConfig.load(path)


def test_planner_config_mapping():
    cfg = tiny_config(n_elite=64, eta=0.7, sigma0=0.4, time_budget_s=0.9)
    pcfg = cfg.planner_config(32, seed=123)
    assert pcfg.mppi.n_samples == 32
    assert pcfg.mppi.n_elite == 32  # clipped to the batch size
    assert pcfg.mppi.seed == 123 and pcfg.mppi.eta == 0.7
    assert pcfg.horizon == cfg.horizon and pcfg.dt == cfg.dt
    assert pcfg.sigma0 == 0.4 and pcfg.time_budget == 0.9
    assert cfg.planner_config(256, 0).mppi.n_elite == 64


# -- suites -------------------------------------------------------------------


@pytest.fixture(scope="module")
def tiny_suite(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    cfg = tiny_config()
    rows, summaries = bench.run_suite(cfg, out, clock_factory=counter_clock_factory())
    return cfg, out, rows, summaries


def test_suite_runs_every_job_in_order(tiny_suite):
    cfg, _, rows, summaries = tiny_suite
    assert [(r.batch_size, r.run) for r in rows] == [(8, 0), (8, 1), (16, 0), (16, 1)]
    assert [b for b, _ in summaries] == [8, 16]
    for batch_size, summary in summaries:
        records = [r.record for r in rows if r.batch_size == batch_size]
        assert summary == bench.compute_metrics(records)
    # the frozen-clock episodes still record per-cycle planning times
    assert all(r.record.n_steps > 0 for r in rows)


def test_suite_csv_round_trip(tiny_suite):
    cfg, out, rows, summaries = tiny_suite
    parsed = bench.read_episodes(out / "episodes.csv")
    assert len(parsed) == len(rows)
    for got, row in zip(parsed, rows):
        assert got["task"] == "ball"
        assert (got["batch_size"], got["run"], got["seed"]) == (
            row.batch_size,
            row.run,
            row.record.seed,
        )
        assert got["success"] == row.record.success
        assert got["t_task_s"] == row.record.t_task  # repr() round-trips exactly
        assert got["n_steps"] == row.record.n_steps
        t_comp = np.asarray(row.record.t_comp)
        assert got["t_comp_mean_s"] == t_comp.mean()
    summary_text = (out / "summary.csv").read_text()
    assert summary_text == bench.summary_csv(cfg.task, summaries)
    assert summary_text.splitlines()[0] == ",".join(bench.SUMMARY_COLUMNS)


def test_summarize_rows_recovers_pooled_stats(tiny_suite):
    _, out, rows, summaries = tiny_suite
    parsed = bench.read_episodes(out / "episodes.csv")
    recovered = bench.summarize_rows(parsed)
    assert [(t, b) for t, b, _ in recovered] == [("ball", 8), ("ball", 16)]
    for (_, _, got), (_, want) in zip(recovered, summaries):
        assert got.n_runs == want.n_runs and got.n_success == want.n_success
        assert got.success_rate_pct == want.success_rate_pct
        assert got.t_task_mean_s == pytest.approx(want.t_task_mean_s, rel=1e-12)
        assert got.t_task_std_s == pytest.approx(want.t_task_std_s, rel=1e-12, abs=1e-15)
        assert got.t_comp_mean_s == pytest.approx(want.t_comp_mean_s, rel=1e-9)
        assert got.t_comp_std_s == pytest.approx(want.t_comp_std_s, rel=1e-9, abs=1e-12)


def test_summarize_rows_handles_zero_steps_and_rejects_empty():
    rows = [
        {
            "task": "tray",
            "batch_size": 4,
            "run": 0,
            "seed": 1,
            "success": True,
            "failure_reason": "none",
            "t_task_s": 0.0,
            "n_steps": 0,
            "t_comp_mean_s": math.nan,
            "t_comp_std_s": math.nan,
        }
    ]
    (_, _, m), = bench.summarize_rows(rows)
    assert math.isnan(m.t_comp_mean_s) and m.n_success == 1
    with pytest.raises(ValueError, match="non-empty"):
        bench.summarize_rows([])


def test_read_episodes_rejects_foreign_header(tmp_path):
    path = tmp_path / "episodes.csv"
    path.write_text("alpha,beta\n1,2\n")
    with pytest.raises(bench.ConfigError, match="columns"):
        bench.read_episodes(path)


def test_suite_is_worker_count_invariant(tiny_suite):
    cfg, _, rows, _ = tiny_suite
    rows3, summaries3 = bench.run_suite(cfg, workers=3, clock_factory=counter_clock_factory())
    assert bench.episodes_csv(rows3) == bench.episodes_csv(rows)
    assert [r.record for r in rows3] == [r.record for r in rows]
    del summaries3
    with pytest.raises(ValueError, match="workers"):
        bench.run_suite(cfg, workers=0)


def test_zero_step_episode_row_survives_csv(tmp_path):
    row = bench.EpisodeRow(task="tray", batch_size=4, run=0, record=record(t_task=0.0))
    text = bench.episodes_csv([row])
    path = tmp_path / "episodes.csv"
    path.write_text(text)
    parsed = bench.read_episodes(path)
    assert parsed[0]["n_steps"] == 0 and math.isnan(parsed[0]["t_comp_mean_s"])


def test_episode_row_uses_full_precision():
    awkward = 0.1 + 0.2  # not exactly 0.3
    row = bench.EpisodeRow(task="tray", batch_size=4, run=0, record=record(t_task=awkward))
    assert float(row.as_csv()[6]) == awkward


def test_config_is_frozen():
    cfg = tiny_config()
    clone = replace(cfg, n_runs=3)
    assert clone.n_runs == 3 and cfg.n_runs == 2
