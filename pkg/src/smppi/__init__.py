"""Sampling-based model-predictive planning for dual-arm manipulation.

The library is organised bottom-up:

``trajectory``
    joint-space sequence types, finite differences, quaternion helpers
``projection``
    box-constrained smoothing of velocity sequences (per-joint dual solver)
``sampler``
    Gaussian policy, elite selection and the weighted policy update
``geometry``
    batched signed distances between capsules, spheres and boxes
``world``
    kinematic surrogate simulator (forward kinematics, contact latching)
``scenes``
    ready-made arm/scene descriptions used by the benchmarks
``costs`` / ``tasks``
    running-cost terms and the task definitions that combine them
``planner``
    the receding-horizon optimizer loop and episode runner
``bench`` / ``cli``
    batch benchmark harness with CSV/JSON reporting
"""

from .trajectory import (
    DerivativeBounds,
    Pose,
    VelocitySequence,
    finite_difference,
    integrate_velocities,
    quat_geodesic,
)
from .projection import (
    InfeasibleBoundsError,
    ProjectionInfo,
    SolverConfig,
    project,
    project_batch,
)
from .sampler import DegenerateBatchError, GaussianPolicy, MppiConfig, select_elite
from .world import WorldState, forward_kinematics, initial_state, rollout, rollout_batch
from .tasks import (
    CostWeights,
    PhaseState,
    TaskSpec,
    advance_phase,
    assemble_task_cost,
    make_task,
    task_success,
)
from .planner import (
    EpisodeRecord,
    PlannerConfig,
    PlanResult,
    optimize,
    optimize_sequences,
    run_episode,
    step_execution,
    warm_start,
)

__all__ = [
    "DerivativeBounds",
    "Pose",
    "VelocitySequence",
    "finite_difference",
    "integrate_velocities",
    "quat_geodesic",
    "InfeasibleBoundsError",
    "ProjectionInfo",
    "SolverConfig",
    "project",
    "project_batch",
    "DegenerateBatchError",
    "GaussianPolicy",
    "MppiConfig",
    "select_elite",
    "WorldState",
    "forward_kinematics",
    "initial_state",
    "rollout",
    "rollout_batch",
    "CostWeights",
    "PhaseState",
    "TaskSpec",
    "advance_phase",
    "assemble_task_cost",
    "make_task",
    "task_success",
    "EpisodeRecord",
    "PlannerConfig",
    "PlanResult",
    "optimize",
    "optimize_sequences",
    "run_episode",
    "step_execution",
    "warm_start",
]

__version__ = "0.1.0"
