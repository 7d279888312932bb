"""Benchmark harness: scenario configs, deterministic episode suites, and
paper-style metrics with CSV reports.

A scenario config is a canonical-JSON document (sorted keys, two-space
indent, versioned ``schema_version`` field) naming a task, a batch-size
sweep, a run count, and a master seed.  ``run_suite`` executes every
(batch size, run) episode with an independently derived child seed and a
randomized goal, then writes two CSV artifacts:

* ``episodes.csv`` — one row per episode with the fixed column set
  ``task, batch_size, run, seed, success, failure_reason, t_task_s,
  n_steps, t_comp_mean_s, t_comp_std_s``.
* ``summary.csv`` — one row per batch size: success rate, task-time mean
  and population std over all runs, and computation-time mean and population
  std pooled over every planning step of every run.

Episodes are deterministic given the config, so re-running a suite
reproduces both files byte for byte regardless of the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, List, Mapping, Optional, Sequence, Tuple

import jsonschema
import numpy as np

from .planner import EpisodeRecord, PlannerConfig, run_episode
from .sampler import MppiConfig
from .tasks import TASK_KINDS, make_task, sample_goal

SCHEMA_VERSION = 1

EPISODE_COLUMNS = (
    "task",
    "batch_size",
    "run",
    "seed",
    "success",
    "failure_reason",
    "t_task_s",
    "n_steps",
    "t_comp_mean_s",
    "t_comp_std_s",
)

SUMMARY_COLUMNS = (
    "task",
    "batch_size",
    "n_runs",
    "n_success",
    "success_rate_pct",
    "t_task_mean_s",
    "t_task_std_s",
    "t_comp_mean_s",
    "t_comp_std_s",
)

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "task", "batch_sizes", "n_runs", "master_seed"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "task": {"enum": list(TASK_KINDS)},
        "batch_sizes": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 1,
        },
        "n_runs": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0},
        "horizon": {"type": "integer", "minimum": 3},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "execute_steps": {"type": "integer", "minimum": 1},
        "n_iterations": {"type": "integer", "minimum": 1},
        "n_elite": {"type": "integer", "minimum": 1},
        "eta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "sigma0": {"type": "number", "exclusiveMinimum": 0},
        "timeout_s": {"type": "number", "exclusiveMinimum": 0},
        "time_budget_s": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "goal_low": {
            "type": "array",
            "items": {"type": "number"},
            "minItems": 3,
            "maxItems": 3,
        },
        "goal_high": {
            "type": "array",
            "items": {"type": "number"},
            "minItems": 3,
            "maxItems": 3,
        },
    },
}


class ConfigError(ValueError):
    """Raised when a scenario config fails schema or consistency checks."""


@dataclass(frozen=True)
class ScenarioConfig:
    """One benchmark scenario: a task, its sweep, and all planner knobs."""

    task: str
    batch_sizes: Tuple[int, ...] = (256, 512, 1024)
    n_runs: int = 20
    master_seed: int = 0
    horizon: int = 20
    dt: float = 0.1
    execute_steps: int = 2
    n_iterations: int = 2
    n_elite: int = 64
    eta: float = 0.8
    beta: float = 1.0
    sigma0: float = 0.5
    timeout_s: float = 120.0
    time_budget_s: Optional[float] = None
    goal_low: Optional[Tuple[float, float, float]] = None
    goal_high: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        try:
            jsonschema.validate(self.to_dict(), CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid scenario config: {exc.message}") from exc
        if (self.goal_low is None) != (self.goal_high is None):
            raise ConfigError("goal_low and goal_high must be given together")
        if self.goal_low is not None and any(
            lo > hi for lo, hi in zip(self.goal_low, self.goal_high)
        ):
            raise ConfigError("goal_low must not exceed goal_high")

    def to_dict(self) -> dict:
        d = {"schema_version": SCHEMA_VERSION}
        d.update(asdict(self))
        d["batch_sizes"] = list(self.batch_sizes)
        for key in ("goal_low", "goal_high"):
            if d[key] is None:
                del d[key]
            else:
                d[key] = list(d[key])
        if d["time_budget_s"] is None:
            del d["time_budget_s"]
        return d

    @classmethod
    def from_dict(cls, data: Mapping) -> "ScenarioConfig":
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid scenario config: {exc.message}") from exc
        kwargs = dict(data)
        kwargs.pop("schema_version")
        kwargs["batch_sizes"] = tuple(kwargs["batch_sizes"])
        for key in ("goal_low", "goal_high"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    def dumps(self) -> str:
        """Canonical JSON: sorted keys, two-space indent, trailing newline."""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(data)

    def planner_config(self, batch_size: int, seed: int) -> PlannerConfig:
        return PlannerConfig(
            mppi=MppiConfig(
                n_samples=batch_size,
                n_elite=min(self.n_elite, batch_size),
                n_iterations=self.n_iterations,
                eta=self.eta,
                beta=self.beta,
                seed=seed,
            ),
            horizon=self.horizon,
            dt=self.dt,
            execute_steps=self.execute_steps,
            sigma0=self.sigma0,
            time_budget=self.time_budget_s,
        )


@dataclass(frozen=True)
class MetricsSummary:
    """Success rate, task-time stats (all runs), and computation-time stats
    (pooled over every planning step of every run); population stds."""

    n_runs: int
    n_success: int
    success_rate_pct: float
    t_task_mean_s: float
    t_task_std_s: float
    t_comp_mean_s: float
    t_comp_std_s: float


def derive_seed(master_seed: int, batch_size: int, run: int) -> int:
    """Planner seed for one episode; injective in (master, batch, run)."""
    ss = np.random.SeedSequence([master_seed, batch_size, run])
    return int(ss.generate_state(1, np.uint64)[0] >> 1)


def goal_rng(master_seed: int, batch_size: int, run: int) -> np.random.Generator:
    """Goal-sampling stream for one episode, independent of the planner seed."""
    ss = np.random.SeedSequence([master_seed, batch_size, run])
    return np.random.default_rng(ss.spawn(1)[0])


def episode_goal(config: ScenarioConfig, batch_size: int, run: int) -> np.ndarray:
    rng = goal_rng(config.master_seed, batch_size, run)
    if config.goal_low is not None:
        return rng.uniform(np.array(config.goal_low), np.array(config.goal_high))
    return sample_goal(config.task, rng)


def compute_metrics(records: Sequence[EpisodeRecord]) -> MetricsSummary:
    """Aggregate episode records with the benchmark's three formulas.

    Success rate is a percentage of all runs; task-time statistics average
    the recorded completion (or failure) time of every run; computation-time
    statistics pool the per-step planning times of all runs into one sample.
    All standard deviations are population (divide by N) values.
    """
    if not records:
        raise ValueError("records must be non-empty")
    n = len(records)
    n_success = sum(1 for r in records if r.success)
    t_task = np.array([r.t_task for r in records], dtype=np.float64)
    pooled = np.concatenate([np.asarray(r.t_comp, dtype=np.float64) for r in records]) if any(
        r.t_comp for r in records
    ) else np.empty(0)
    t_comp_mean = float(pooled.mean()) if pooled.size else math.nan
    t_comp_std = float(pooled.std()) if pooled.size else math.nan
    return MetricsSummary(
        n_runs=n,
        n_success=n_success,
        success_rate_pct=100.0 * n_success / n,
        t_task_mean_s=float(t_task.mean()),
        t_task_std_s=float(t_task.std()),
        t_comp_mean_s=t_comp_mean,
        t_comp_std_s=t_comp_std,
    )


@dataclass(frozen=True)
class EpisodeRow:
    """One episodes.csv row; a flat, CSV-ready view of an EpisodeRecord."""

    task: str
    batch_size: int
    run: int
    record: EpisodeRecord

    def as_csv(self) -> Tuple:
        r = self.record
        t_comp = np.asarray(r.t_comp, dtype=np.float64)
        mean = float(t_comp.mean()) if t_comp.size else math.nan
        std = float(t_comp.std()) if t_comp.size else math.nan
        return (
            self.task,
            self.batch_size,
            self.run,
            r.seed,
            str(r.success).lower(),
            r.failure_reason,
            repr(float(r.t_task)),
            r.n_steps,
            repr(mean),
            repr(std),
        )


def run_suite(
    config: ScenarioConfig,
    out_dir=None,
    *,
    workers: int = 1,
    clock_factory: Optional[Callable[[], Callable[[], float]]] = None,
) -> Tuple[List[EpisodeRow], List[Tuple[int, MetricsSummary]]]:
    """Run the full (batch size x run) sweep and optionally write CSVs.

    Each episode derives its planner seed and goal from (master seed,
    batch size, run) alone, and — when ``clock_factory`` is given — times
    itself with a private clock instance, so results do not depend on
    ``workers`` or scheduling order.  Rows come back sorted by
    (batch_size, run).
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    jobs = [(b, r) for b in config.batch_sizes for r in range(config.n_runs)]

    def one(job: Tuple[int, int]) -> EpisodeRow:
        batch_size, run = job
        seed = derive_seed(config.master_seed, batch_size, run)
        goal = episode_goal(config, batch_size, run)
        task = make_task(config.task, target_position=goal)
        pcfg = config.planner_config(batch_size, seed)
        clock = time.perf_counter if clock_factory is None else clock_factory()
        record = run_episode(task, pcfg, timeout=config.timeout_s, clock=clock)
        return EpisodeRow(task=config.task, batch_size=batch_size, run=run, record=record)

    if workers == 1:
        rows = [one(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, jobs))
    rows.sort(key=lambda row: (row.batch_size, row.run))

    summaries = []
    for batch_size in config.batch_sizes:
        records = [row.record for row in rows if row.batch_size == batch_size]
        summaries.append((batch_size, compute_metrics(records)))

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "episodes.csv").write_text(episodes_csv(rows))
        (out / "summary.csv").write_text(summary_csv(config.task, summaries))
    return rows, summaries


def episodes_csv(rows: Sequence[EpisodeRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EPISODE_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()


def summary_csv(task: str, summaries: Sequence[Tuple[int, MetricsSummary]]) -> str:
    """Summary table; computation-time stats pool all steps of all runs."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for batch_size, m in summaries:
        writer.writerow(
            (
                task,
                batch_size,
                m.n_runs,
                m.n_success,
                repr(m.success_rate_pct),
                repr(m.t_task_mean_s),
                repr(m.t_task_std_s),
                repr(m.t_comp_mean_s),
                repr(m.t_comp_std_s),
            )
        )
    return buf.getvalue()


def read_episodes(path) -> List[dict]:
    """Parse an episodes.csv back into typed row dictionaries."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != EPISODE_COLUMNS:
            raise ConfigError(f"unexpected episode CSV columns: {reader.fieldnames}")
        rows = []
        for raw in reader:
            rows.append(
                {
                    "task": raw["task"],
                    "batch_size": int(raw["batch_size"]),
                    "run": int(raw["run"]),
                    "seed": int(raw["seed"]),
                    "success": raw["success"] == "true",
                    "failure_reason": raw["failure_reason"],
                    "t_task_s": float(raw["t_task_s"]),
                    "n_steps": int(raw["n_steps"]),
                    "t_comp_mean_s": float(raw["t_comp_mean_s"]),
                    "t_comp_std_s": float(raw["t_comp_std_s"]),
                }
            )
    return rows


def summarize_rows(rows: Sequence[dict]) -> List[Tuple[str, int, MetricsSummary]]:
    """Recompute per-batch summaries from episode rows alone.

    Pooled computation-time statistics are recovered from each row's per-run
    mean/std through the law of total variance, so the result matches
    ``compute_metrics`` on the original records up to rounding.
    """
    if not rows:
        raise ValueError("rows must be non-empty")
    keys = sorted({(r["task"], r["batch_size"]) for r in rows})
    out = []
    for task, batch_size in keys:
        group = [r for r in rows if (r["task"], r["batch_size"]) == (task, batch_size)]
        n = len(group)
        n_success = sum(1 for r in group if r["success"])
        t_task = np.array([r["t_task_s"] for r in group])
        steps = np.array([r["n_steps"] for r in group], dtype=np.float64)
        total_steps = steps.sum()
        if total_steps > 0:
            means = np.array([r["t_comp_mean_s"] for r in group])
            stds = np.array([r["t_comp_std_s"] for r in group])
            live = steps > 0
            pooled_mean = float((steps[live] * means[live]).sum() / total_steps)
            second_moment = (steps[live] * (stds[live] ** 2 + means[live] ** 2)).sum() / total_steps
            pooled_std = float(math.sqrt(max(second_moment - pooled_mean**2, 0.0)))
        else:
            pooled_mean = math.nan
            pooled_std = math.nan
        out.append(
            (
                task,
                batch_size,
                MetricsSummary(
                    n_runs=n,
                    n_success=n_success,
                    success_rate_pct=100.0 * n_success / n,
                    t_task_mean_s=float(t_task.mean()),
                    t_task_std_s=float(t_task.std()),
                    t_comp_mean_s=pooled_mean,
                    t_comp_std_s=pooled_std,
                ),
            )
        )
    return out
