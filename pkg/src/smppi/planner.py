"""Receding-horizon planning loop.

One planning cycle draws a batch of velocity sequences from the current
Gaussian policy, projects every sample onto the derivative bounds, rolls the
projected batch through the world model, scores it with the task cost, and
refits the policy to the elite subset; after a configured number of such
iterations the elite-minimum sequence of the final batch is returned.  The
episode loop executes the averaged leading commands of each cycle's best
sequence, re-measures the world, advances the task phase, and warm-starts the
next cycle from the shifted policy.

``optimize_sequences`` is the optimizer core with a caller-supplied cost
callable; ``optimize`` binds it to the surrogate world and a task.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Tuple

import numpy as np

from .projection import SolverConfig, project_batch
from .sampler import (
    DegenerateBatchError,
    GaussianPolicy,
    MppiConfig,
    policy_rng,
    select_elite,
    update,
)
from .tasks import (
    PhaseState,
    TaskSpec,
    advance_phase,
    assemble_task_cost,
    initial_phase,
    task_pair_mask,
    task_success,
)
from .trajectory import DerivativeBounds, VelocitySequence
from .world import WorldState, initial_state, rollout_batch


@dataclass(frozen=True)
class PlannerConfig:
    """Sizes and rates of the receding-horizon loop.

    ``execute_steps`` leading rows of each cycle's best sequence are averaged
    into the command executed until the next cycle; the warm-start shift
    defaults to the same count because that prefix has been consumed.
    ``sigma0`` is the per-joint sampling std of a fresh policy and of the
    re-inflated tail rows after a warm start.  ``time_budget`` (seconds), if
    set, stops a cycle early after the iteration that exceeds it.
    """

    mppi: MppiConfig = field(default_factory=MppiConfig)
    horizon: int = 20
    dt: float = 0.1
    execute_steps: int = 2
    shift: Optional[int] = None
    sigma0: float = 0.5
    sigma_floor: float = 0.02
    time_budget: Optional[float] = None
    projection: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.horizon < 3:
            raise ValueError("horizon must be at least 3")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if not 1 <= self.execute_steps < self.horizon:
            raise ValueError("execute_steps must satisfy 1 <= E < horizon")
        shift = self.execute_steps if self.shift is None else self.shift
        if not 0 <= shift < self.horizon:
            raise ValueError("shift must satisfy 0 <= shift < horizon")
        if self.sigma0 <= 0.0 or self.sigma_floor <= 0.0:
            raise ValueError("sigma0 and sigma_floor must be positive")
        if self.time_budget is not None and self.time_budget <= 0.0:
            raise ValueError("time_budget must be positive when set")

    @property
    def shift_steps(self) -> int:
        return self.execute_steps if self.shift is None else self.shift


@dataclass(frozen=True)
class PlanResult:
    """Outcome of one planning cycle.

    ``best`` is the lowest-cost member of the final iteration's elite set;
    ``stats`` carries per-iteration arrays (``elite_min``, ``elite_mean``,
    ``best_so_far``) where ``best_so_far`` is the running minimum of
    ``elite_min`` and never increases.
    """

    best: VelocitySequence
    best_cost: float
    policy: GaussianPolicy
    stats: Mapping[str, np.ndarray]
    wall_time: float
    iterations: int


@dataclass(frozen=True)
class EpisodeRecord:
    """One episode's outcome: success flag, simulated task time, per-cycle
    computation times, and the failure reason (``none`` on success)."""

    success: bool
    t_task: float
    t_comp: Tuple[float, ...]
    failure_reason: str
    seed: int

    def __post_init__(self):
        if self.failure_reason not in ("none", "collision", "timeout", "drop"):
            raise ValueError(f"unknown failure reason {self.failure_reason!r}")
        if self.success != (self.failure_reason == "none"):
            raise ValueError("success and failure_reason disagree")

    @property
    def n_steps(self) -> int:
        return len(self.t_comp)


def fresh_policy(config: PlannerConfig, dof: int) -> GaussianPolicy:
    """Zero-mean policy at the configured initial sampling spread."""
    return GaussianPolicy.zero(
        config.horizon, dof, sigma=config.sigma0, sigma_floor=config.sigma_floor
    )


def optimize_sequences(
    policy: GaussianPolicy,
    config: PlannerConfig,
    evaluate: Callable[[np.ndarray], np.ndarray],
    theta0: np.ndarray,
    bounds: DerivativeBounds,
    *,
    cycle: int = 0,
    clock: Callable[[], float] = time.perf_counter,
) -> PlanResult:
    """Iterate sample -> project -> evaluate -> elite -> refit and return the
    final elite minimum.

    ``evaluate`` maps projected velocity batches (n, H, D) to per-sample
    costs (n,); it sees only bound-feasible sequences.  Deterministic given
    the config seed and ``cycle``; each iteration draws from an independent
    counter-based stream so results do not depend on thread count.
    """
    mppi = config.mppi
    start = clock()
    elite_min, elite_mean = [], []
    best_seq: Optional[np.ndarray] = None
    best_cost = np.inf
    for m in range(mppi.n_iterations):
        rng = policy_rng(mppi.seed, cycle=cycle, iteration=m)
        raw = policy.sample(mppi.n_samples, rng)
        projected = project_batch(raw, theta0, bounds, config.dt, config=config.projection)
        costs = np.asarray(evaluate(projected), dtype=np.float64)
        if costs.shape != (mppi.n_samples,):
            raise ValueError("evaluate must return one cost per sample")
        try:
            elite_idx = select_elite(costs, mppi.n_elite)
        except DegenerateBatchError as exc:
            raise DegenerateBatchError(
                f"iteration {m} of cycle {cycle}: {exc}"
            ) from exc
        elite = projected[elite_idx]
        elite_costs = costs[elite_idx]
        policy = update(policy, elite, elite_costs, eta=mppi.eta, beta=mppi.beta)
        elite_min.append(float(elite_costs[0]))
        elite_mean.append(float(elite_costs.mean()))
        best_seq = elite[0]
        best_cost = float(elite_costs[0])
        if config.time_budget is not None and clock() - start > config.time_budget:
            break
    iterations = len(elite_min)
    stats = {
        "elite_min": np.array(elite_min),
        "elite_mean": np.array(elite_mean),
        "best_so_far": np.minimum.accumulate(np.array(elite_min)),
    }
    return PlanResult(
        best=VelocitySequence(best_seq, config.dt),
        best_cost=best_cost,
        policy=policy,
        stats=stats,
        wall_time=clock() - start,
        iterations=iterations,
    )


def optimize(
    task: TaskSpec,
    state0: WorldState,
    phase: PhaseState,
    policy: GaussianPolicy,
    config: PlannerConfig,
    *,
    cycle: int = 0,
    clock: Callable[[], float] = time.perf_counter,
) -> PlanResult:
    """One planning cycle over the surrogate world from the measured state."""
    mask = task_pair_mask(task, phase)
    scene = task.scene

    def evaluate(velocities: np.ndarray) -> np.ndarray:
        result = rollout_batch(scene, state0, velocities, config.dt, mask=mask)
        return assemble_task_cost(task, phase, result)

    return optimize_sequences(
        policy,
        config,
        evaluate,
        state0.joints,
        task.bounds,
        cycle=cycle,
        clock=clock,
    )


def step_execution(result: PlanResult, execute_steps: int) -> np.ndarray:
    """Velocity command for the next control interval: the per-joint mean of
    the best sequence's first ``execute_steps`` rows."""
    values = result.best.values
    if not 1 <= execute_steps <= values.shape[0]:
        raise ValueError("execute_steps must lie in [1, horizon]")
    return values[:execute_steps].mean(axis=0)


def warm_start(policy: GaussianPolicy, shift: int, initial_variance: float) -> GaussianPolicy:
    """Shift the policy forward by ``shift`` executed steps.

    Vacated tail rows repeat the last mean row and are re-inflated to the
    initial variance so the horizon's new end is explored rather than
    inherited at the shrunken late-cycle spread.
    """
    if not 0 <= shift < policy.mean.shape[0]:
        raise ValueError("shift must satisfy 0 <= shift < horizon")
    if initial_variance <= 0.0:
        raise ValueError("initial_variance must be positive")
    if shift == 0:
        return policy
    mean = np.concatenate(
        [policy.mean[shift:], np.tile(policy.mean[-1], (shift, 1))], axis=0
    )
    variance = np.concatenate(
        [
            policy.variance[shift:],
            np.full((shift, policy.variance.shape[1]), float(initial_variance)),
        ],
        axis=0,
    )
    return GaussianPolicy(mean, variance, sigma_floor=policy.sigma_floor)


def run_episode(
    task: TaskSpec,
    config: PlannerConfig,
    *,
    timeout: float = 120.0,
    clock: Callable[[], float] = time.perf_counter,
    state0: Optional[WorldState] = None,
) -> EpisodeRecord:
    """Drive the task to success, collision, drop, or timeout.

    Each cycle plans from the measured state, executes the averaged leading
    command for ``execute_steps`` surrogate steps, checks collisions on the
    executed states under the phase's collision-pair mask, re-evaluates the
    task phase, and warm-starts the next cycle.  Simulated time advances by
    ``execute_steps * dt`` per cycle; the timeout applies to simulated time,
    so records are machine-independent.
    """
    if timeout <= 0.0:
        raise ValueError("timeout must be positive")
    scene = task.scene
    state = initial_state(scene) if state0 is None else state0
    phase = initial_phase(task)
    policy = fresh_policy(config, scene.dof)
    seed = config.mppi.seed
    steps = config.execute_steps
    sim_steps = 0
    t_comp: list[float] = []

    def record(success: bool, reason: str) -> EpisodeRecord:
        return EpisodeRecord(
            success=success,
            t_task=min(sim_steps * config.dt, timeout),
            t_comp=tuple(t_comp),
            failure_reason=reason,
            seed=seed,
        )

    if np.any(state.d < 0.0):
        return record(False, "collision")
    if task_success(task, state):
        return record(True, "none")

    cycle = 0
    while True:
        if sim_steps * config.dt >= timeout - 1e-12:
            return record(False, "timeout")
        result = optimize(task, state, phase, policy, config, cycle=cycle, clock=clock)
        t_comp.append(result.wall_time)
        command = step_execution(result, steps)
        mask = task_pair_mask(task, phase)
        executed = rollout_batch(
            scene, state, np.tile(command, (1, steps, 1)), config.dt, mask=mask
        )
        sim_steps += steps
        if executed.distances[0, 1:].min() < 0.0:
            return record(False, "collision")
        state = executed.state_at(steps)
        if task.kind == "ball" and state.ball_dropped:
            return record(False, "drop")
        if task_success(task, state):
            return record(True, "none")
        phase = advance_phase(task, phase, state, time_s=sim_steps * config.dt)
        policy = warm_start(result.policy, config.shift_steps, config.sigma0**2)
        cycle += 1
