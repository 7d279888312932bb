"""Benchmark task definitions: tuned weights, goal targets, phase logic, and
the per-task total cost assembled from the terms in :mod:`smppi.costs`.

Three tasks ship with the library, all on the planar two-arm scene:

* ``tray`` — grasp a tray at both rims and carry it to a target pose.
* ``ball`` — squeeze a ball between the end-effector tips, lift, and
  transport it to a target point.
* ``handover`` — arm 1 picks a cube by its left handle, meets arm 2 at a
  hand-off plane where the cube changes hands, and arm 2 places it.

Each task runs through a fixed sequence of phases.  The phase decides which
cost terms are active (approach terms while picking, transport terms while
carrying) and, for the ball task, which collision pairs are scored: while the
ball is carried, ball-manipulator pairs are dropped from the collision term so
the tips may press against the surface instead of being repelled by it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Tuple

import numpy as np

from . import costs
from .scenes import (
    BALL_GRIP_DEPTH,
    planar_ball_scene,
    planar_bounds,
    planar_handover_scene,
    planar_tray_scene,
)
from .trajectory import DerivativeBounds, quat_geodesic
from .world import RolloutResult, SceneDescription, WorldState

TASK_KINDS = ("tray", "ball", "handover")

_PHASES = {
    "tray": ("pick", "move"),
    "ball": ("pick", "move"),
    "handover": ("pick", "pass", "place"),
}

_IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class CostWeights:
    """Non-negative magnitudes for every cost term a task may use.

    Phase gating is not stored here; :func:`assemble_task_cost` derives the
    active gates from the current phase.  ``arm_phase`` holds the hand-over
    task's per-arm activation per phase, e.g. ``{"pick": (1, 0), ...}``.
    """

    collision: float = 1.0
    joint_deviation: float = 0.0
    vertical_alignment: float = 0.0
    planar_alignment: float = 0.0
    relative_velocity: float = 0.0
    pick_position: float = 0.0
    pick_orientation: float = 0.0
    ee_distance: float = 0.0
    object_position: float = 0.0
    object_orientation: float = 0.0
    move_orientation: float = 0.0
    ee_orientation: float = 0.0
    midpoint_alignment: float = 0.0
    position: float = 0.0
    orientation: float = 0.0
    hold_penalty: float = 0.0
    arm_phase: Optional[Mapping[str, Tuple[float, float]]] = None

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if name == "arm_phase":
                continue
            if not np.isfinite(value) or value < 0.0:
                raise ValueError(f"weight {name} must be finite and >= 0, got {value}")
        if self.arm_phase is not None:
            for phase, pair in self.arm_phase.items():
                if len(pair) != 2 or any(w < 0.0 for w in pair):
                    raise ValueError(f"arm_phase[{phase!r}] must be two non-negative weights")


@dataclass(frozen=True)
class PhaseState:
    """Progress through a task's phase sequence.

    ``streak`` counts consecutive control steps on which the advance condition
    held; a phase switches only after ``dwell_steps`` such steps, so a single
    flickering latch cannot advance the task.  Phases only move forward.
    """

    name: str = "pick"
    entry_time: float = 0.0
    streak: int = 0
    position_threshold: float = 0.02
    orientation_threshold: float = 0.15
    dwell_steps: int = 3

    def __post_init__(self):
        if self.position_threshold <= 0 or self.orientation_threshold <= 0:
            raise ValueError("phase thresholds must be positive")
        if self.dwell_steps < 1:
            raise ValueError("dwell_steps must be >= 1")
        if self.streak < 0:
            raise ValueError("streak must be >= 0")


@dataclass(frozen=True)
class TaskSpec:
    """Everything a planner needs about one task: the scene, the goal targets,
    the cost weights, and the velocity-derivative bounds.

    Only the fields relevant to ``kind`` are populated; construction rejects a
    spec whose required fields are missing.
    """

    kind: str
    scene: SceneDescription
    weights: CostWeights
    bounds: DerivativeBounds
    gamma: float = 0.1
    epsilon: float = 0.05
    target_position: Optional[np.ndarray] = None
    target_quat: Optional[np.ndarray] = None
    grasp_positions: Optional[np.ndarray] = None
    grasp_quats: Optional[np.ndarray] = None
    move_quats: Optional[np.ndarray] = None
    ee_quats: Optional[np.ndarray] = None
    ball_position: Optional[np.ndarray] = None
    ee_separation: Optional[float] = None
    pick_positions: Optional[np.ndarray] = None
    pass_positions: Optional[np.ndarray] = None
    place_positions: Optional[np.ndarray] = None
    phase_quats: Optional[Mapping[str, np.ndarray]] = None
    success_position_tol: float = 0.02
    success_orientation_tol: float = 0.15

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {self.kind!r}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.success_position_tol <= 0.0 or self.success_orientation_tol <= 0.0:
            raise ValueError("success tolerances must be positive")
        required = {
            "tray": ("target_position", "target_quat", "grasp_positions", "grasp_quats",
                     "move_quats", "ee_separation"),
            "ball": ("target_position", "ee_quats", "ball_position", "ee_separation"),
            "handover": ("target_position", "pick_positions", "pass_positions",
                         "place_positions", "phase_quats"),
        }[self.kind]
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(f"{self.kind} task requires {name}")
        for name in ("target_quat", "grasp_quats", "move_quats", "ee_quats"):
            q = getattr(self, name)
            if q is not None and np.any(np.abs(np.linalg.norm(np.asarray(q), axis=-1) - 1.0) > 1e-9):
                raise ValueError(f"{name} must contain unit quaternions")

    @property
    def phases(self) -> Tuple[str, ...]:
        return _PHASES[self.kind]


def initial_phase(task: TaskSpec, **thresholds) -> PhaseState:
    """First phase of the task's sequence (always a pick phase)."""
    return PhaseState(name=task.phases[0], **thresholds)


def task_pair_mask(task: TaskSpec, phase: PhaseState) -> np.ndarray:
    """Collision-pair selector for rollouts in the given phase.

    The ball task drops manipulator-ball pairs while the ball is carried, so
    the tips can press on the surface; every other (task, phase) scores all
    pairs.
    """
    mask = np.ones(task.scene.n_pairs, dtype=bool)
    if task.kind == "ball" and phase.name == "move":
        mask &= ~task.scene.object_pair_mask()
    return mask


def _phase_gates(task: TaskSpec, phase: PhaseState) -> Mapping[str, float]:
    if phase.name not in task.phases:
        raise ValueError(f"phase {phase.name!r} does not belong to a {task.kind} task")
    return {name: float(name == phase.name) for name in task.phases}


def task_cost_terms(task: TaskSpec, phase: PhaseState, result: RolloutResult) -> Mapping[str, np.ndarray]:
    """Unweighted values of every cost term the task uses, one array (n,) per
    term.  ``assemble_task_cost`` is the weighted, phase-gated sum of these.

    Pose-dependent terms score steps 1..H (the steps the action influences);
    the collision term sees the full distance sequence so the first transition
    away from the measured state is constrained too.
    """
    if result.scene is not task.scene:
        raise ValueError("rollout was produced for a different scene")
    scene = task.scene
    d = result.distances
    p1, p2 = result.ee1_pos[:, 1:], result.ee2_pos[:, 1:]
    q1, q2 = result.ee1_quat[:, 1:], result.ee2_quat[:, 1:]
    v1, v2 = result.ee1_vel[:, 1:], result.ee2_vel[:, 1:]
    theta = result.joints[:, 1:]

    terms = {
        "collision": costs.collision_cost(d, task.gamma),
        "joint_deviation": costs.joint_deviation_cost(theta, scene.theta_home),
    }
    # steps on which the carried object is not held; scored only in the
    # carrying phases, where losing the object should never look cheap
    if task.kind == "tray":
        terms["hold"] = (~result.tray_grasped[:, 1:]).sum(axis=1).astype(np.float64)
    elif task.kind == "ball":
        terms["hold"] = (~result.ball_held[:, 1:]).sum(axis=1).astype(np.float64)
    else:
        terms["hold"] = (result.cube_holder[:, 1:] == 0).sum(axis=1).astype(np.float64)
    if task.kind == "tray":
        terms["vertical_alignment"] = costs.axis_alignment_cost(p1, p2, "z")
        terms["relative_velocity"] = costs.relative_velocity_cost(p1, p2, v1, v2)
        terms["pick_position"] = costs.paired_position_cost(
            p1, p2, task.grasp_positions[0], task.grasp_positions[1]
        )
        terms["pick_orientation"] = costs.paired_orientation_cost(
            q1, q2, task.grasp_quats[0], task.grasp_quats[1]
        )
        terms["ee_distance"] = costs.ee_distance_cost(p1, p2, task.ee_separation)
        terms["object_position"] = costs.position_target_cost(
            result.tray_pos[:, 1:], task.target_position
        )
        terms["object_orientation"] = costs.orientation_target_cost(
            result.tray_quat[:, 1:], task.target_quat
        )
        terms["move_orientation"] = costs.paired_orientation_cost(
            q1, q2, task.move_quats[0], task.move_quats[1]
        )
    elif task.kind == "ball":
        terms["planar_alignment"] = costs.axis_alignment_cost(p1, p2, "yz")
        terms["relative_velocity"] = costs.relative_velocity_cost(p1, p2, v1, v2)
        terms["ee_orientation"] = costs.paired_orientation_cost(
            q1, q2, task.ee_quats[0], task.ee_quats[1]
        )
        terms["ee_distance"] = costs.ee_distance_cost(p1, p2, task.ee_separation)
        terms["midpoint_alignment"] = costs.midpoint_alignment_cost(
            p1, p2, task.ball_position, task.epsilon
        )
        terms["object_position"] = costs.midpoint_target_cost(
            p1, p2, task.target_position, task.epsilon
        )
    else:
        terms["planar_alignment"] = costs.axis_alignment_cost(p1, p2, "yz")
        arm_w = task.weights.arm_phase or {}
        w1, w2 = arm_w.get(phase.name, (1.0, 1.0))
        mode = "x" if phase.name == "pass" else "full"
        targets = {
            "pick": task.pick_positions,
            "pass": task.pass_positions,
            "place": task.place_positions,
        }[phase.name]
        terms["position"] = w1 * costs.position_target_cost(p1, targets[0], mode) + (
            w2 * costs.position_target_cost(p2, targets[1], mode)
        )
        quats = task.phase_quats[phase.name]
        terms["orientation"] = w1 * costs.orientation_target_cost(q1, quats[0]) + (
            w2 * costs.orientation_target_cost(q2, quats[1])
        )
        # the receiving arm's hand target assumes a level cube; score the cube
        # itself as well so a tilted grip cannot park it just outside tolerance
        terms["object_position"] = costs.position_target_cost(
            result.cube_pos[:, 1:], task.target_position
        )
    return terms


def assemble_task_cost(task: TaskSpec, phase: PhaseState, result: RolloutResult) -> np.ndarray:
    """Total phase-gated cost of each rollout sample, shape (n,)."""
    w = task.weights
    gates = _phase_gates(task, phase)
    t = task_cost_terms(task, phase, result)

    total = w.collision * t["collision"] + w.joint_deviation * t["joint_deviation"]
    if task.kind == "tray":
        total = total + w.vertical_alignment * t["vertical_alignment"]
        total = total + w.relative_velocity * t["relative_velocity"]
        total = total + gates["pick"] * (
            w.pick_position * t["pick_position"] + w.pick_orientation * t["pick_orientation"]
        )
        total = total + gates["move"] * (
            w.ee_distance * t["ee_distance"]
            + w.object_position * t["object_position"]
            + w.object_orientation * t["object_orientation"]
            + w.move_orientation * t["move_orientation"]
            + w.hold_penalty * t["hold"]
        )
    elif task.kind == "ball":
        total = total + w.planar_alignment * t["planar_alignment"]
        total = total + w.relative_velocity * t["relative_velocity"]
        total = total + w.ee_orientation * t["ee_orientation"]
        total = total + w.ee_distance * t["ee_distance"]
        total = total + gates["pick"] * w.midpoint_alignment * t["midpoint_alignment"]
        total = total + gates["move"] * (
            w.object_position * t["object_position"] + w.hold_penalty * t["hold"]
        )
    else:
        total = total + gates["pass"] * w.planar_alignment * t["planar_alignment"]
        total = total + w.position * t["position"] + w.orientation * t["orientation"]
        total = total + gates["place"] * w.object_position * t["object_position"]
        total = total + (1.0 - gates["pick"]) * w.hold_penalty * t["hold"]
    return total


def _advance_condition(task: TaskSpec, phase: PhaseState, state: WorldState) -> bool:
    if task.kind == "tray":
        if not state.tray_grasped:
            return False
        err = max(
            float(np.linalg.norm(state.ee1.position - task.grasp_positions[0])),
            float(np.linalg.norm(state.ee2.position - task.grasp_positions[1])),
        )
        return err < phase.position_threshold
    if task.kind == "ball":
        if not state.ball_held or state.ball_dropped:
            return False
        mid = 0.5 * (state.ee1.position + state.ee2.position)
        hold = task.ball_position - np.array([0.0, 0.0, task.epsilon])
        return float(np.linalg.norm(mid - hold)) < phase.position_threshold
    if phase.name == "pick":
        return state.cube_holder == 1
    return state.cube_holder == 2


def task_success(task: TaskSpec, state: WorldState) -> bool:
    """Whether the measured state completes the task: the carried object is at
    its target (within the task's tolerances) and still properly held."""
    tol = task.success_position_tol
    if task.kind == "tray":
        if not state.tray_grasped:
            return False
        pos_ok = np.linalg.norm(state.tray_pose.position - task.target_position) < tol
        ori_ok = (
            quat_geodesic(state.tray_pose.quaternion, task.target_quat)
            < task.success_orientation_tol
        )
        return bool(pos_ok and ori_ok)
    if task.kind == "ball":
        if not state.ball_held or state.ball_dropped:
            return False
        return bool(np.linalg.norm(state.ball_position - task.target_position) < tol)
    if state.cube_holder != 2:
        return False
    return bool(np.linalg.norm(state.cube_pose.position - task.target_position) < tol)


def advance_phase(task: TaskSpec, phase: PhaseState, state: WorldState, time_s: float = 0.0) -> PhaseState:
    """Advance one phase after the transition condition has held for
    ``dwell_steps`` consecutive calls; phases never move backward."""
    seq = task.phases
    index = seq.index(phase.name)
    if index == len(seq) - 1:
        return phase
    if not _advance_condition(task, phase, state):
        return replace(phase, streak=0) if phase.streak else phase
    streak = phase.streak + 1
    if streak >= phase.dwell_steps:
        return replace(phase, name=seq[index + 1], entry_time=time_s, streak=0)
    return replace(phase, streak=streak)


# ---------------------------------------------------------------------------
# task factories


def tray_task(target_position=None, weights: Optional[CostWeights] = None) -> TaskSpec:
    """Tray carry on the planar scene: grasp both rims, lift between the wall
    obstacles, and hold the tray at ``target_position`` level."""
    scene = planar_tray_scene()
    tray = scene.tray
    spawn = tray.pose0.position
    if target_position is None:
        target_position = np.array([0.0, 0.0, 0.58])
    if weights is None:
        weights = CostWeights(
            collision=10.0,
            joint_deviation=0.02,
            vertical_alignment=3.0,
            relative_velocity=1.0,
            pick_position=6.0,
            pick_orientation=2.0,
            ee_distance=150.0,
            object_position=8.0,
            object_orientation=2.0,
            move_orientation=3.0,
            hold_penalty=2.0,
        )
    grasp_positions = spawn + tray.grasp_offsets
    level = np.stack([_IDENTITY_QUAT, _IDENTITY_QUAT])
    return TaskSpec(
        kind="tray",
        scene=scene,
        weights=weights,
        bounds=planar_bounds(),
        target_position=np.asarray(target_position, dtype=np.float64),
        target_quat=_IDENTITY_QUAT.copy(),
        grasp_positions=grasp_positions,
        grasp_quats=level,
        move_quats=level,
        ee_separation=float(tray.span),
    )


def ball_task(target_position=None, weights: Optional[CostWeights] = None) -> TaskSpec:
    """Ball lift-and-transport on the planar scene: squeeze the ball between
    the tips, lift, and carry its center to ``target_position``."""
    scene = planar_ball_scene()
    ball = scene.ball
    if target_position is None:
        target_position = np.array([0.10, 0.0, 0.55])
    if weights is None:
        weights = CostWeights(
            collision=10.0,
            joint_deviation=0.02,
            planar_alignment=2.0,
            relative_velocity=0.5,
            ee_orientation=0.5,
            ee_distance=40.0,
            midpoint_alignment=6.0,
            object_position=6.0,
            hold_penalty=2.0,
        )
    level = np.stack([_IDENTITY_QUAT, _IDENTITY_QUAT])
    return TaskSpec(
        kind="ball",
        scene=scene,
        weights=weights,
        bounds=planar_bounds(),
        epsilon=BALL_GRIP_DEPTH,
        target_position=np.asarray(target_position, dtype=np.float64),
        ee_quats=level,
        ball_position=ball.position0.copy(),
        ee_separation=float(ball.hold_separation),
    )


def handover_task(target_position=None, weights: Optional[CostWeights] = None) -> TaskSpec:
    """Cube hand-over on the planar scene: arm 1 picks the cube by its left
    handle, both arms meet at the hand-off plane, arm 2 carries the cube to
    ``target_position``."""
    scene = planar_handover_scene()
    cube = scene.cube
    spawn = cube.pose0.position
    if target_position is None:
        target_position = np.array([0.26, 0.0, 0.42])
    else:
        target_position = np.asarray(target_position, dtype=np.float64)
    if weights is None:
        weights = CostWeights(
            collision=10.0,
            joint_deviation=0.02,
            planar_alignment=2.0,
            position=6.0,
            orientation=1.0,
            object_position=8.0,
            hold_penalty=2.0,
            arm_phase={"pick": (1.0, 0.0), "pass": (1.0, 1.0), "place": (0.0, 1.0)},
        )
    pass_x = 0.0
    pass_z = 0.52
    handle = float(cube.handle_offsets[1, 0])
    pick_positions = np.stack([spawn + cube.handle_offsets[0], spawn + cube.handle_offsets[0]])
    pass_positions = np.array([[pass_x - handle, 0.0, pass_z], [pass_x + handle, 0.0, pass_z]])
    place_positions = np.stack(
        [target_position + cube.handle_offsets[1], target_position + cube.handle_offsets[1]]
    )
    level = np.stack([_IDENTITY_QUAT, _IDENTITY_QUAT])
    return TaskSpec(
        kind="handover",
        scene=scene,
        weights=weights,
        bounds=planar_bounds(),
        target_position=target_position,
        pick_positions=pick_positions,
        pass_positions=pass_positions,
        place_positions=place_positions,
        phase_quats={"pick": level, "pass": level, "place": level},
    )


_FACTORIES = {"tray": tray_task, "ball": ball_task, "handover": handover_task}


def make_task(kind: str, target_position=None, weights: Optional[CostWeights] = None) -> TaskSpec:
    """Build one of the named benchmark tasks, optionally overriding the goal."""
    if kind not in _FACTORIES:
        raise ValueError(f"unknown task kind {kind!r}")
    return _FACTORIES[kind](target_position=target_position, weights=weights)


def sample_goal(kind: str, rng: np.random.Generator) -> np.ndarray:
    """Draw a reachable goal for the task kind; used to vary episodes."""
    if kind == "tray":
        return np.array([rng.uniform(-0.06, 0.06), 0.0, rng.uniform(0.50, 0.65)])
    if kind == "ball":
        return np.array([rng.uniform(0.04, 0.16), 0.0, rng.uniform(0.50, 0.60)])
    if kind == "handover":
        return np.array([rng.uniform(0.24, 0.34), 0.0, rng.uniform(0.35, 0.50)])
    raise ValueError(f"unknown task kind {kind!r}")
