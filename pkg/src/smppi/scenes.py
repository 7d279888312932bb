"""Ready-made scenes: a fast planar dual-arm setup and a full 6-DOF pair.

Planar scene
------------
Both arms live in the x-z plane (y = 0).  Arm 1 is based at (-0.55, 0, 0.35)
with three links of lengths 0.4 / 0.35 / 0.25 m extending along +x and all
joints rotating about +y, so positive angles pitch links downward.  Arm 2
mirrors arm 1 across the x = 0 plane (base +0.55, links along -x, axes -y);
with equal joint values the two arms are exact mirror images.  The home
configuration parks both end-effectors level at (-/+0.18, 0, 0.50), elbows
arcing up and outward, clear of the object spawn area near (0, 0, 0.25).

Full scene
----------
Two 6-DOF arms based 1.2 m apart at (-/+0.6, 0, 0), the second rotated pi
about z to face the first; link capsules of radius 4 cm.  At all-zero joints
arm 1's end-effector sits at base + (0.73, 0, 0.10) with identity orientation
(offsets: 0.15 up, then 0.25 + 0.25 + 0.10 + 0.05 + 0.08 along x with a 0.05
drop at the wrist); arm 2's mirrors it at (-0.13, 0, 0.10), rotated pi about
z.  The home configuration curls both elbows upward so the arms start well
separated.
"""

from __future__ import annotations

import numpy as np

from .trajectory import DerivativeBounds, Pose
from .world import (
    ArmModel,
    BallModel,
    CapsuleObstacle,
    CubeModel,
    SceneDescription,
    SphereObstacle,
    TrayModel,
)

__all__ = [
    "planar_arm_pair",
    "planar_bounds",
    "planar_scene",
    "planar_tray_scene",
    "planar_ball_scene",
    "planar_handover_scene",
    "six_dof_scene",
    "BALL_GRIP_DEPTH",
]

#: vertical offset between grip midpoint and ball center (the epsilon of the
#: ball-task costs); the hold separation below is derived from it
BALL_GRIP_DEPTH = 0.05

#: elbow-up rest pose placing the end-effector level at (-0.18, 0, 0.50)
_PLANAR_HOME_ARM = np.array([-1.9615, 2.6407, -0.6792])

_PLANAR_LINKS = np.array([0.4, 0.35, 0.25])
_PLANAR_RADII = np.array([0.045, 0.04, 0.03])


def planar_arm_pair():
    y = np.array([0.0, 1.0, 0.0])
    arm1 = ArmModel(
        base_position=np.array([-0.55, 0.0, 0.35]),
        base_quat=np.array([1.0, 0.0, 0.0, 0.0]),
        joint_axes=np.stack([y, y, y]),
        link_offsets=np.stack([[l, 0.0, 0.0] for l in _PLANAR_LINKS]),
        link_radii=_PLANAR_RADII.copy(),
    )
    arm2 = ArmModel(
        base_position=np.array([0.55, 0.0, 0.35]),
        base_quat=np.array([1.0, 0.0, 0.0, 0.0]),
        joint_axes=np.stack([-y, -y, -y]),
        link_offsets=np.stack([[-l, 0.0, 0.0] for l in _PLANAR_LINKS]),
        link_radii=_PLANAR_RADII.copy(),
    )
    return arm1, arm2


def planar_bounds() -> DerivativeBounds:
    """Joint boxes for the planar pair: +-3 rad, 1.5 rad/s, 8 rad/s^2, 80 rad/s^3."""
    return DerivativeBounds.symmetric(6, position=3.0, velocity=1.5, acceleration=8.0, jerk=80.0)


def _planar_home():
    return np.concatenate([_PLANAR_HOME_ARM, _PLANAR_HOME_ARM])


def planar_scene(obstacles=(), tray=None, ball=None, cube=None) -> SceneDescription:
    arm1, arm2 = planar_arm_pair()
    return SceneDescription(
        arm1=arm1,
        arm2=arm2,
        theta_home=_planar_home(),
        obstacles=tuple(obstacles),
        tray=tray,
        ball=ball,
        cube=cube,
        # wider release hysteresis than the type's default: replanned carries
        # wobble a few millimetres and must not shed the object mid-transport
        release_factor=3.0,
    )


def planar_tray_scene() -> SceneDescription:
    """Tray on a low pedestal between the arms; two rounded walls flank the
    lifted goal region."""
    tray = TrayModel(
        half_extents=np.array([0.12, 0.05, 0.015]),
        grasp_offsets=np.array([[-0.12, 0.0, 0.0], [0.12, 0.0, 0.0]]),
        pose0=Pose(np.array([0.0, 0.0, 0.25]), np.array([1.0, 0.0, 0.0, 0.0])),
        collision_radius=0.02,
    )
    walls = (
        CapsuleObstacle(p0=np.array([-0.26, 0.0, 0.80]), p1=np.array([-0.26, 0.0, 1.05]), radius=0.03),
        CapsuleObstacle(p0=np.array([0.26, 0.0, 0.80]), p1=np.array([0.26, 0.0, 1.05]), radius=0.03),
    )
    return planar_scene(obstacles=walls, tray=tray)


def planar_ball_scene() -> SceneDescription:
    """Ball resting between the arms; one spherical obstacle left of the lift path."""
    radius = 0.08
    hold_separation = 2.0 * np.sqrt(radius**2 - BALL_GRIP_DEPTH**2)
    ball = BallModel(radius=radius, hold_separation=hold_separation, position0=np.array([0.0, 0.0, 0.25]))
    obstacles = (SphereObstacle(center=np.array([-0.14, 0.0, 0.72]), radius=0.05),)
    return planar_scene(obstacles=obstacles, ball=ball)


def planar_handover_scene() -> SceneDescription:
    """Cube in arm 1's half of the workspace with a handle on each of its +-x
    faces; one spherical obstacle above the hand-off corridor."""
    # handles protrude 1.5 cm past the +-x faces so both grippers fit at hand-off
    cube = CubeModel(
        half_extents=np.array([0.03, 0.03, 0.03]),
        handle_offsets=np.array([[-0.045, 0.0, 0.0], [0.045, 0.0, 0.0]]),
        pose0=Pose(np.array([-0.18, 0.0, 0.30]), np.array([1.0, 0.0, 0.0, 0.0])),
        collision_radius=0.052,
    )
    obstacles = (SphereObstacle(center=np.array([0.10, 0.0, 0.72]), radius=0.05),)
    return planar_scene(obstacles=obstacles, cube=cube)


def six_dof_scene(obstacles=()) -> SceneDescription:
    """Two 6-DOF arms facing each other 1.2 m apart, elbows curled at home."""
    z = np.array([0.0, 0.0, 1.0])
    y = np.array([0.0, 1.0, 0.0])
    x = np.array([1.0, 0.0, 0.0])
    axes = np.stack([z, y, y, y, z, y])
    offsets = np.array(
        [
            [0.0, 0.0, 0.15],
            [0.25, 0.0, 0.0],
            [0.25, 0.0, 0.0],
            [0.10, 0.0, 0.0],
            [0.05, 0.0, -0.05],
            [0.08, 0.0, 0.0],
        ]
    )
    del x  # reserved: no roll joint in this chain
    radii = np.full(6, 0.04)
    arm1 = ArmModel(
        base_position=np.array([-0.6, 0.0, 0.0]),
        base_quat=np.array([1.0, 0.0, 0.0, 0.0]),
        joint_axes=axes,
        link_offsets=offsets,
        link_radii=radii,
    )
    arm2 = ArmModel(
        base_position=np.array([0.6, 0.0, 0.0]),
        base_quat=np.array([0.0, 0.0, 0.0, 1.0]),  # pi about z: faces arm 1
        joint_axes=axes,
        link_offsets=offsets,
        link_radii=radii,
    )
    home_arm = np.array([0.9, -0.5, 1.0, -0.5, 0.0, 0.0])
    return SceneDescription(
        arm1=arm1,
        arm2=arm2,
        theta_home=np.concatenate([home_arm, home_arm]),
        obstacles=tuple(obstacles),
    )
