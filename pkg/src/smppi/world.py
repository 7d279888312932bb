"""Deterministic kinematic surrogate world: arms, objects, contacts, rollouts.

Two serial arms move by Euler-integrating commanded joint velocities; forward
kinematics places a capsule per link.  Movable objects (tray, ball, cube) are
state machines: free objects stay put, attached objects move rigidly with the
holding end-effector frame(s).  Attachment latches when pose tolerances are met
and releases when the error grows past ``release_factor`` times the latch
tolerance, standing in for contact physics.

Contact is summarised by a fixed vector of signed distances, one entry per
registered pair: every cross-arm link pair, every link against every static
obstacle, and every non-tip link against the movable object.  Tip links are
deliberately absent from object pairs -- touching the object with the gripper
is grasping, not collision.  A boolean mask can drop pairs from a rollout
(e.g. ignore arm-object contact while carrying), mirroring how the cost treats
held objects.

Everything here is pure and deterministic: identical inputs give bitwise
identical rollouts, regardless of batch size or call order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry
from .trajectory import (
    Pose,
    VelocitySequence,
    quat_conjugate,
    quat_from_axis_angle,
    quat_mul,
    quat_rotate,
)

__all__ = [
    "ArmModel",
    "SphereObstacle",
    "CapsuleObstacle",
    "BoxObstacle",
    "TrayModel",
    "BallModel",
    "CubeModel",
    "SceneDescription",
    "WorldState",
    "RolloutResult",
    "forward_kinematics",
    "signed_distances",
    "rollout",
    "rollout_batch",
]

_IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class ArmModel:
    """Serial arm: each joint rotates about its axis, then its link extends.

    ``link_offsets[i]`` is the link vector following joint ``i`` expressed in
    that joint's frame; the capsule for link ``i`` spans the segment between
    consecutive joint origins with radius ``link_radii[i]``.
    """

    base_position: np.ndarray
    base_quat: np.ndarray
    joint_axes: np.ndarray
    link_offsets: np.ndarray
    link_radii: np.ndarray

    def __post_init__(self):
        for name in ("base_position", "base_quat", "joint_axes", "link_offsets", "link_radii"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.joint_axes.shape != self.link_offsets.shape or self.joint_axes.ndim != 2:
            raise ValueError("joint_axes and link_offsets must both be (D, 3)")
        if self.link_radii.shape != (self.joint_axes.shape[0],):
            raise ValueError("need one capsule radius per link")
        if np.any(self.link_radii <= 0.0):
            raise ValueError("link radii must be positive")

    @property
    def dof(self) -> int:
        return self.joint_axes.shape[0]


@dataclass(frozen=True)
class SphereObstacle:
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class CapsuleObstacle:
    p0: np.ndarray
    p1: np.ndarray
    radius: float


@dataclass(frozen=True)
class BoxObstacle:
    center: np.ndarray
    half_extents: np.ndarray
    quat: np.ndarray = field(default_factory=lambda: _IDENTITY_QUAT.copy())


@dataclass(frozen=True)
class TrayModel:
    """Rigid tray: box extents for display, a capsule along its long (x) axis as
    the collision proxy, and one grasp point per arm on the rim."""

    half_extents: np.ndarray
    grasp_offsets: np.ndarray  # (2, 3) in tray frame
    pose0: Pose
    collision_radius: float = 0.02

    @property
    def span(self) -> float:
        """Distance between the two grasp points (the tray's grasped dimension)."""
        return float(np.linalg.norm(np.asarray(self.grasp_offsets[0]) - np.asarray(self.grasp_offsets[1])))


@dataclass(frozen=True)
class BallModel:
    """Ball held between the end-effectors; ``hold_separation`` is the
    end-effector distance at which the (slightly below-center) grip is stable."""

    radius: float
    hold_separation: float
    position0: np.ndarray


@dataclass(frozen=True)
class CubeModel:
    """Cube with one grasp handle per arm on opposite faces; collision proxy is
    its bounding sphere."""

    half_extents: np.ndarray
    handle_offsets: np.ndarray  # (2, 3) in cube frame
    pose0: Pose
    collision_radius: float = 0.05


@dataclass(frozen=True)
class SceneDescription:
    """Immutable scene: two arms, static obstacles, at most one movable object,
    grasp tolerances, and the derived contact-pair registry."""

    arm1: ArmModel
    arm2: ArmModel
    theta_home: np.ndarray
    obstacles: tuple = ()
    tray: TrayModel | None = None
    ball: BallModel | None = None
    cube: CubeModel | None = None
    grasp_pos_tol: float = 0.015
    grasp_ori_tol: float = 0.15
    hold_sep_tol: float = 0.01
    hold_mid_tol: float = 0.02
    release_factor: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "theta_home", np.asarray(self.theta_home, dtype=np.float64))
        if self.theta_home.shape != (self.dof,):
            raise ValueError("theta_home must cover both arms' joints")
        if sum(obj is not None for obj in (self.tray, self.ball, self.cube)) > 1:
            raise ValueError("at most one movable object per scene")

    @property
    def dof(self) -> int:
        return self.arm1.dof + self.arm2.dof

    @property
    def movable(self):
        for obj in (self.tray, self.ball, self.cube):
            if obj is not None:
                return obj
        return None

    def split(self, joints):
        joints = np.asarray(joints, dtype=np.float64)
        return joints[..., : self.arm1.dof], joints[..., self.arm1.dof :]

    # -- contact-pair registry ------------------------------------------------

    def pair_labels(self):
        """Ordered labels of the registered contact pairs (length B)."""
        d1, d2 = self.arm1.dof, self.arm2.dof
        labels = [f"arm1_link{i}:arm2_link{j}" for i in range(d1) for j in range(d2)]
        for o, _ in enumerate(self.obstacles):
            labels += [f"arm{a}_link{i}:obstacle{o}" for a, d in ((1, d1), (2, d2)) for i in range(d)]
        if self.movable is not None:
            name = "tray" if self.tray else ("ball" if self.ball else "cube")
            labels += [f"arm{a}_link{i}:{name}" for a, d in ((1, d1), (2, d2)) for i in range(d - 1)]
        return labels

    @property
    def n_pairs(self) -> int:
        return len(self.pair_labels())

    def object_pair_mask(self):
        """Boolean (B,) marking the link-object entries of the registry."""
        mask = np.zeros(self.n_pairs, dtype=bool)
        if self.movable is not None:
            n_obj = (self.arm1.dof - 1) + (self.arm2.dof - 1)
            mask[self.n_pairs - n_obj :] = True
        return mask


@dataclass(frozen=True)
class WorldState:
    """Snapshot of everything the planner can see at one instant.

    Attachment bookkeeping (``*_anchor``/``*_quat_rel``: the object pose
    expressed in the carrying frame at latch time) rides along so a rollout can
    resume exactly where a previous one stopped.
    """

    joints: np.ndarray
    ee1: Pose
    ee2: Pose
    ee1_vel: np.ndarray
    ee2_vel: np.ndarray
    d: np.ndarray
    tray_pose: Pose | None = None
    ball_position: np.ndarray | None = None
    cube_pose: Pose | None = None
    tray_grasped: bool = False
    ball_held: bool = False
    ball_dropped: bool = False
    cube_holder: int = 0  # 0 free, 1/2 held by that arm
    tray_anchor: np.ndarray | None = None
    tray_quat_rel: np.ndarray | None = None
    cube_anchor: np.ndarray | None = None
    cube_quat_rel: np.ndarray | None = None


def forward_kinematics(scene: SceneDescription, joints):
    """End-effector poses for both arms; ``joints`` is (..., D).

    Returns ``(Pose, Pose)`` for a single configuration, or a tuple of
    ``(positions, quaternions)`` pairs for batched input.
    """
    joints = np.asarray(joints, dtype=np.float64)
    if joints.shape[-1] != scene.dof:
        raise ValueError(f"expected {scene.dof} joints, got {joints.shape[-1]}")
    t1, t2 = scene.split(joints)
    a1, q1 = _fk_arm(scene.arm1, t1)
    a2, q2 = _fk_arm(scene.arm2, t2)
    if joints.ndim == 1:
        return (
            Pose(a1[-1], _normalize(q1[-1])),
            Pose(a2[-1], _normalize(q2[-1])),
        )
    return (a1[..., -1, :], q1[..., -1, :]), (a2[..., -1, :], q2[..., -1, :])


def _normalize(q):
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def _fk_arm(arm: ArmModel, thetas):
    """Joint-origin anchors (..., D+1, 3) and frame quaternions (..., D+1, 4)."""
    thetas = np.asarray(thetas, dtype=np.float64)
    lead = thetas.shape[:-1]
    anchors = np.empty(lead + (arm.dof + 1, 3))
    quats = np.empty(lead + (arm.dof + 1, 4))
    anchors[..., 0, :] = arm.base_position
    quats[..., 0, :] = arm.base_quat
    for i in range(arm.dof):
        step = quat_from_axis_angle(arm.joint_axes[i], thetas[..., i])
        quats[..., i + 1, :] = quat_mul(quats[..., i, :], step)
        anchors[..., i + 1, :] = anchors[..., i, :] + quat_rotate(quats[..., i + 1, :], arm.link_offsets[i])
    return anchors, quats


def _arm_segments(scene, anchors1, anchors2):
    """Per-link capsule segments and radii for both arms, concatenated."""
    starts = np.concatenate([anchors1[..., :-1, :], anchors2[..., :-1, :]], axis=-2)
    ends = np.concatenate([anchors1[..., 1:, :], anchors2[..., 1:, :]], axis=-2)
    radii = np.concatenate([scene.arm1.link_radii, scene.arm2.link_radii])
    return starts, ends, radii


def _object_proxy(scene, tray_pos, tray_quat, ball_pos, cube_pos):
    """Collision proxy of the movable object, batched: ('sphere', c, r) or
    ('capsule', p0, p1, r)."""
    if scene.tray is not None:
        hx = scene.tray.half_extents[0]
        axis = np.array([hx, 0.0, 0.0])
        p0 = tray_pos + quat_rotate(tray_quat, -axis)
        p1 = tray_pos + quat_rotate(tray_quat, axis)
        return ("capsule", p0, p1, scene.tray.collision_radius)
    if scene.ball is not None:
        return ("sphere", ball_pos, scene.ball.radius)
    if scene.cube is not None:
        return ("sphere", cube_pos, scene.cube.collision_radius)
    return None


def _pair_distances(scene, anchors1, anchors2, proxy):
    """Signed distances for the full registry, shape (..., B)."""
    d1, d2 = scene.arm1.dof, scene.arm2.dof
    out = []
    # cross-arm link pairs, row-major in (arm1 link, arm2 link)
    s1, e1 = anchors1[..., :-1, :], anchors1[..., 1:, :]
    s2, e2 = anchors2[..., :-1, :], anchors2[..., 1:, :]
    cross = geometry.capsule_capsule(
        s1[..., :, None, :],
        e1[..., :, None, :],
        scene.arm1.link_radii[:, None],
        s2[..., None, :, :],
        e2[..., None, :, :],
        scene.arm2.link_radii[None, :],
    )
    out.append(cross.reshape(cross.shape[:-2] + (d1 * d2,)))

    starts, ends, radii = _arm_segments(scene, anchors1, anchors2)
    for obs in scene.obstacles:
        if isinstance(obs, SphereObstacle):
            d = geometry.capsule_sphere(starts, ends, radii, np.asarray(obs.center, float), obs.radius)
        elif isinstance(obs, CapsuleObstacle):
            d = geometry.capsule_capsule(
                starts, ends, radii, np.asarray(obs.p0, float), np.asarray(obs.p1, float), obs.radius
            )
        elif isinstance(obs, BoxObstacle):
            d = geometry.capsule_box(
                starts, ends, radii, np.asarray(obs.center, float), np.asarray(obs.half_extents, float), obs.quat
            )
        else:
            raise TypeError(f"unknown obstacle type {type(obs).__name__}")
        out.append(d)

    if proxy is not None:
        keep = np.concatenate([np.arange(d1 - 1), d1 + np.arange(d2 - 1)])
        s = starts[..., keep, :]
        e = ends[..., keep, :]
        r = radii[keep]
        if proxy[0] == "sphere":
            _, center, rad = proxy
            d = geometry.capsule_sphere(s, e, r, np.asarray(center, float)[..., None, :], rad)
        else:
            _, p0, p1, rad = proxy
            d = geometry.capsule_capsule(
                s, e, r, np.asarray(p0, float)[..., None, :], np.asarray(p1, float)[..., None, :], rad
            )
        out.append(d)
    return np.concatenate(out, axis=-1)


def signed_distances(scene: SceneDescription, state: WorldState, mask=None):
    """Registry distances for one state; ``mask`` (B,) selects a subset."""
    t1, t2 = scene.split(state.joints)
    a1, _ = _fk_arm(scene.arm1, t1)
    a2, _ = _fk_arm(scene.arm2, t2)
    tray_pos = state.tray_pose.position if state.tray_pose else None
    tray_quat = state.tray_pose.quaternion if state.tray_pose else None
    cube_pos = state.cube_pose.position if state.cube_pose else None
    proxy = _object_proxy(scene, tray_pos, tray_quat, state.ball_position, cube_pos)
    d = _pair_distances(scene, a1, a2, proxy)
    if mask is not None:
        d = d[..., np.asarray(mask, bool)]
    return d


def initial_state(scene: SceneDescription, joints=None) -> WorldState:
    """World state at rest: given joints (default home), objects at their spawn
    poses, nothing attached, zero end-effector velocity."""
    joints = scene.theta_home if joints is None else np.asarray(joints, dtype=np.float64)
    ee1, ee2 = forward_kinematics(scene, joints)
    state = WorldState(
        joints=joints,
        ee1=ee1,
        ee2=ee2,
        ee1_vel=np.zeros(3),
        ee2_vel=np.zeros(3),
        d=np.zeros(0),
        tray_pose=scene.tray.pose0 if scene.tray else None,
        ball_position=np.asarray(scene.ball.position0, float) if scene.ball else None,
        cube_pose=scene.cube.pose0 if scene.cube else None,
    )
    return replace(state, d=signed_distances(scene, state))


# ---------------------------------------------------------------------------
# batched rollout engine


class RolloutResult:
    """Arrays over a rollout: index [sample, step, ...]; step 0 is the input state.

    ``distances`` contains only the pairs selected by the rollout's mask; all
    other fields are full.  ``state_at(k)`` reconstructs a WorldState for
    single-sample rollouts.
    """

    def __init__(self, scene, mask, **arrays):
        self.scene = scene
        self.mask = mask
        for k, v in arrays.items():
            setattr(self, k, v)

    @property
    def n_samples(self):
        return self.joints.shape[0]

    @property
    def horizon(self):
        return self.joints.shape[1] - 1

    def state_at(self, k, sample=0) -> WorldState:
        s = sample
        scene = self.scene

        def pose(pos, quat):
            return Pose(pos[s, k], _normalize(quat[s, k]))

        state = WorldState(
            joints=self.joints[s, k],
            ee1=pose(self.ee1_pos, self.ee1_quat),
            ee2=pose(self.ee2_pos, self.ee2_quat),
            ee1_vel=self.ee1_vel[s, k],
            ee2_vel=self.ee2_vel[s, k],
            d=np.zeros(0),
            tray_pose=pose(self.tray_pos, self.tray_quat) if scene.tray else None,
            ball_position=self.ball_pos[s, k] if scene.ball else None,
            cube_pose=pose(self.cube_pos, self.cube_quat) if scene.cube else None,
            tray_grasped=bool(self.tray_grasped[s, k]) if scene.tray else False,
            ball_held=bool(self.ball_held[s, k]) if scene.ball else False,
            ball_dropped=bool(self.ball_dropped[s, k]) if scene.ball else False,
            cube_holder=int(self.cube_holder[s, k]) if scene.cube else 0,
            tray_anchor=self.tray_anchor[s, k] if scene.tray else None,
            tray_quat_rel=_normalize(self.tray_quat_rel[s, k]) if scene.tray else None,
            cube_anchor=self.cube_anchor[s, k] if scene.cube else None,
            cube_quat_rel=_normalize(self.cube_quat_rel[s, k]) if scene.cube else None,
        )
        return replace(state, d=signed_distances(scene, state))

    def states(self, sample=0):
        return [self.state_at(k, sample) for k in range(self.horizon + 1)]


def rollout(scene, state0, velocities, dt=None, mask=None) -> RolloutResult:
    """Roll a single velocity sequence forward from ``state0``."""
    if isinstance(velocities, VelocitySequence):
        vel, dt = velocities.values, velocities.dt
    else:
        vel = np.asarray(velocities, dtype=np.float64)
        if dt is None:
            raise ValueError("dt is required when velocities is a bare array")
    return rollout_batch(scene, state0, vel[None], dt, mask=mask)


def rollout_batch(scene, state0, velocities, dt, mask=None) -> RolloutResult:
    """Roll ``n`` velocity sequences (n, H, D) forward from a shared ``state0``.

    Per step: Euler-integrate joints, run FK, move the attached object rigidly
    with its carrying frame, re-evaluate the attach/release latches against the
    new poses, then record masked signed distances.  Sample ``j`` of the result
    equals a single rollout of sequence ``j``.
    """
    vel = np.asarray(velocities, dtype=np.float64)
    if vel.ndim != 3 or vel.shape[2] != scene.dof:
        raise ValueError(f"velocities must be (n, H, {scene.dof})")
    n, H, D = vel.shape
    if mask is None:
        mask = np.ones(scene.n_pairs, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (scene.n_pairs,):
            raise ValueError(f"mask must have shape ({scene.n_pairs},)")

    has_tray, has_ball, has_cube = scene.tray is not None, scene.ball is not None, scene.cube is not None

    joints = np.empty((n, H + 1, D))
    ee1_pos = np.empty((n, H + 1, 3))
    ee2_pos = np.empty((n, H + 1, 3))
    ee1_quat = np.empty((n, H + 1, 4))
    ee2_quat = np.empty((n, H + 1, 4))
    ee1_vel = np.empty((n, H + 1, 3))
    ee2_vel = np.empty((n, H + 1, 3))
    dists = np.empty((n, H + 1, int(mask.sum())))
    arrays = {}

    joints[:, 0] = state0.joints
    ee1_vel[:, 0] = state0.ee1_vel
    ee2_vel[:, 0] = state0.ee2_vel

    def tile_row(x):
        return np.tile(np.asarray(x, float)[None, :], (n, 1))

    tray_pos = tile_row(state0.tray_pose.position) if has_tray else None
    tray_quat = tile_row(state0.tray_pose.quaternion) if has_tray else None
    ball_pos = tile_row(state0.ball_position) if has_ball else None
    cube_pos = tile_row(state0.cube_pose.position) if has_cube else None
    cube_quat = tile_row(state0.cube_pose.quaternion) if has_cube else None
    tray_grasped = np.full(n, state0.tray_grasped)
    ball_held = np.full(n, state0.ball_held)
    ball_dropped = np.full(n, state0.ball_dropped)
    cube_holder = np.full(n, state0.cube_holder, dtype=np.int8)
    tray_anchor = tile_row(state0.tray_anchor if state0.tray_anchor is not None else np.zeros(3)) if has_tray else None
    tray_qrel = tile_row(state0.tray_quat_rel if state0.tray_quat_rel is not None else _IDENTITY_QUAT) if has_tray else None
    cube_anchor = tile_row(state0.cube_anchor if state0.cube_anchor is not None else np.zeros(3)) if has_cube else None
    cube_qrel = tile_row(state0.cube_quat_rel if state0.cube_quat_rel is not None else _IDENTITY_QUAT) if has_cube else None

    if has_tray:
        arrays["tray_pos"] = np.empty((n, H + 1, 3))
        arrays["tray_quat"] = np.empty((n, H + 1, 4))
        arrays["tray_grasped"] = np.empty((n, H + 1), dtype=bool)
        arrays["tray_anchor"] = np.empty((n, H + 1, 3))
        arrays["tray_quat_rel"] = np.empty((n, H + 1, 4))
    if has_ball:
        arrays["ball_pos"] = np.empty((n, H + 1, 3))
        arrays["ball_held"] = np.empty((n, H + 1), dtype=bool)
        arrays["ball_dropped"] = np.empty((n, H + 1), dtype=bool)
    if has_cube:
        arrays["cube_pos"] = np.empty((n, H + 1, 3))
        arrays["cube_quat"] = np.empty((n, H + 1, 4))
        arrays["cube_holder"] = np.empty((n, H + 1), dtype=np.int8)
        arrays["cube_anchor"] = np.empty((n, H + 1, 3))
        arrays["cube_quat_rel"] = np.empty((n, H + 1, 4))

    pos_tol = scene.grasp_pos_tol
    ori_tol = scene.grasp_ori_tol
    rel = scene.release_factor

    for k in range(H + 1):
        if k > 0:
            joints[:, k] = joints[:, k - 1] + dt * vel[:, k - 1]
        t1, t2 = scene.split(joints[:, k])
        a1, q1 = _fk_arm(scene.arm1, t1)
        a2, q2 = _fk_arm(scene.arm2, t2)
        p1, p2 = a1[:, -1], a2[:, -1]
        ee1_pos[:, k], ee2_pos[:, k] = p1, p2
        ee1_quat[:, k], ee2_quat[:, k] = q1[:, -1], q2[:, -1]
        if k > 0:
            ee1_vel[:, k] = (p1 - ee1_pos[:, k - 1]) / dt
            ee2_vel[:, k] = (p2 - ee2_pos[:, k - 1]) / dt
        mid = 0.5 * (p1 + p2)
        eq1 = _normalize(ee1_quat[:, k])
        eq2 = _normalize(ee2_quat[:, k])

        if has_tray:
            # carried tray moves rigidly with the midpoint frame (arm-1 orientation)
            carried_pos = mid + quat_rotate(eq1, tray_anchor)
            carried_quat = quat_mul(eq1, tray_qrel)
            if k > 0:
                tray_pos = np.where(tray_grasped[:, None], carried_pos, tray_pos)
                tray_quat = np.where(tray_grasped[:, None], carried_quat, tray_quat)
            g1 = tray_pos + quat_rotate(tray_quat, scene.tray.grasp_offsets[0])
            g2 = tray_pos + quat_rotate(tray_quat, scene.tray.grasp_offsets[1])
            perr = np.maximum(np.linalg.norm(p1 - g1, axis=-1), np.linalg.norm(p2 - g2, axis=-1))
            oerr = np.maximum(
                _geo(eq1, tray_quat), _geo(eq2, tray_quat)
            )
            latch = (~tray_grasped) & (perr <= pos_tol) & (oerr <= ori_tol)
            release = tray_grasped & ((perr > rel * pos_tol) | (oerr > rel * ori_tol))
            if np.any(latch):
                anchor_new = quat_rotate(quat_conjugate(eq1), tray_pos - mid)
                qrel_new = quat_mul(quat_conjugate(eq1), tray_quat)
                tray_anchor = np.where(latch[:, None], anchor_new, tray_anchor)
                tray_qrel = np.where(latch[:, None], qrel_new, tray_qrel)
            tray_grasped = (tray_grasped | latch) & ~release
            arrays["tray_pos"][:, k] = tray_pos
            arrays["tray_quat"][:, k] = tray_quat
            arrays["tray_grasped"][:, k] = tray_grasped
            arrays["tray_anchor"][:, k] = tray_anchor
            arrays["tray_quat_rel"][:, k] = tray_qrel

        if has_ball:
            # held ball rides with the midpoint, center one grip-offset above it
            eps = _ball_grip_height(scene.ball)
            carried = mid + np.array([0.0, 0.0, eps])
            if k > 0:
                ball_pos = np.where(ball_held[:, None], carried, ball_pos)
            sep = np.linalg.norm(p1 - p2, axis=-1)
            sep_err = np.abs(sep - scene.ball.hold_separation)
            mid_err = np.linalg.norm(mid - (ball_pos - np.array([0.0, 0.0, eps])), axis=-1)
            latch = (
                (~ball_held)
                & (~ball_dropped)
                & (sep_err <= scene.hold_sep_tol)
                & (mid_err <= scene.hold_mid_tol)
            )
            release = ball_held & (
                (sep_err > rel * scene.hold_sep_tol) | (mid_err > rel * scene.hold_mid_tol)
            )
            ball_dropped = ball_dropped | release
            ball_held = (ball_held | latch) & ~release
            arrays["ball_pos"][:, k] = ball_pos
            arrays["ball_held"][:, k] = ball_held
            arrays["ball_dropped"][:, k] = ball_dropped

        if has_cube:
            held1 = cube_holder == 1
            held2 = cube_holder == 2
            carrier_pos = np.where(held2[:, None], p2, p1)
            carrier_quat = np.where(held2[:, None], eq2, eq1)
            carried_pos = carrier_pos + quat_rotate(carrier_quat, cube_anchor)
            carried_quat = quat_mul(carrier_quat, cube_qrel)
            held_any = held1 | held2
            if k > 0:
                cube_pos = np.where(held_any[:, None], carried_pos, cube_pos)
                cube_quat = np.where(held_any[:, None], carried_quat, cube_quat)
            h1 = cube_pos + quat_rotate(cube_quat, scene.cube.handle_offsets[0])
            h2 = cube_pos + quat_rotate(cube_quat, scene.cube.handle_offsets[1])
            e1h = np.linalg.norm(p1 - h1, axis=-1)
            e2h = np.linalg.norm(p2 - h2, axis=-1)
            # hand-off is directional: arm 1 picks first, arm 2 takes over
            transfer = held1 & (e2h <= pos_tol)
            latch1 = (cube_holder == 0) & (e1h <= pos_tol)
            latch2 = (cube_holder == 0) & ~latch1 & (e2h <= pos_tol)
            release = (held1 & (e1h > rel * pos_tol) & ~transfer) | (held2 & (e2h > rel * pos_tol))
            new_holder = cube_holder.copy()
            new_holder[release] = 0
            new_holder[latch1] = 1
            new_holder[latch2] = 2
            new_holder[transfer] = 2
            attach1 = latch1
            attach2 = latch2 | transfer
            if np.any(attach1):
                cube_anchor = np.where(
                    attach1[:, None], quat_rotate(quat_conjugate(eq1), cube_pos - p1), cube_anchor
                )
                cube_qrel = np.where(attach1[:, None], quat_mul(quat_conjugate(eq1), cube_quat), cube_qrel)
            if np.any(attach2):
                cube_anchor = np.where(
                    attach2[:, None], quat_rotate(quat_conjugate(eq2), cube_pos - p2), cube_anchor
                )
                cube_qrel = np.where(attach2[:, None], quat_mul(quat_conjugate(eq2), cube_quat), cube_qrel)
            cube_holder = new_holder
            arrays["cube_pos"][:, k] = cube_pos
            arrays["cube_quat"][:, k] = cube_quat
            arrays["cube_holder"][:, k] = cube_holder
            arrays["cube_anchor"][:, k] = cube_anchor
            arrays["cube_quat_rel"][:, k] = cube_qrel

        proxy = _object_proxy(scene, tray_pos, tray_quat, ball_pos, cube_pos)
        full = _pair_distances(scene, a1, a2, proxy)
        dists[:, k] = full[:, mask]

    return RolloutResult(
        scene,
        mask,
        joints=joints,
        ee1_pos=ee1_pos,
        ee1_quat=ee1_quat,
        ee2_pos=ee2_pos,
        ee2_quat=ee2_quat,
        ee1_vel=ee1_vel,
        ee2_vel=ee2_vel,
        distances=dists,
        **arrays,
    )


def _geo(q1, q2):
    dot = np.abs(np.sum(q1 * q2, axis=-1))
    return 2.0 * np.arccos(np.clip(dot, -1.0, 1.0))


def _ball_grip_height(ball: BallModel):
    """Vertical offset from the grip midpoint to the ball center implied by the
    hold separation: grips touch the sphere surface below its equator."""
    half = 0.5 * ball.hold_separation
    return float(np.sqrt(max(ball.radius**2 - half**2, 0.0)))
