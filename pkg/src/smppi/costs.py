"""Cost terms for dual-arm planning, vectorized over rollout batches.

Every function maps step-indexed arrays to one non-negative scalar per batch
element: inputs shaped ``(..., K, d)`` produce ``(...)`` outputs, so a whole
sample batch is scored in a single call.  Each term vanishes exactly on its
stated zero set, which the tests construct explicitly.
"""

from __future__ import annotations

import numpy as np

from .trajectory import quat_geodesic

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


def _axis_indices(axes) -> np.ndarray:
    """Turn an axis spec ('z', 'yz', iterable of names/indices) into sorted
    unique coordinate indices; rejects the empty set."""
    if isinstance(axes, str):
        names = list(axes)
    else:
        names = list(axes)
    idx = []
    for a in names:
        if isinstance(a, str):
            if a not in _AXIS_INDEX:
                raise ValueError(f"unknown axis {a!r}")
            idx.append(_AXIS_INDEX[a])
        else:
            i = int(a)
            if not 0 <= i <= 2:
                raise ValueError(f"axis index out of range: {i}")
            idx.append(i)
    if not idx:
        raise ValueError("axis set must be non-empty")
    return np.unique(idx)


def collision_cost(distances, gamma: float):
    """Barrier on a signed-distance sequence (..., K, B).

    Sum over consecutive steps of max(-d_next + (1-gamma)*d_prev, 0) — each
    pair must keep at least a (1-gamma) fraction of its clearance per step —
    plus one unit for every (step, pair) in penetration.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim < 2:
        raise ValueError("distances must be (..., K, B)")
    shrink = np.maximum(-d[..., 1:, :] + (1.0 - gamma) * d[..., :-1, :], 0.0)
    penetration = d < 0.0
    return shrink.sum(axis=(-2, -1)) + penetration.sum(axis=(-2, -1)).astype(np.float64)


def joint_deviation_cost(joints, home):
    """Sum over steps of the Euclidean distance to the home configuration."""
    theta = np.asarray(joints, dtype=np.float64)
    home = np.asarray(home, dtype=np.float64)
    return np.linalg.norm(theta - home, axis=-1).sum(axis=-1)


def axis_alignment_cost(p1, p2, axes):
    """Sum over steps of the inter-arm offset restricted to the given axes.

    ``axes`` picks coordinates by name ('z', 'yz', ...) or index; restricting
    to {z} keeps the end-effectors level, {y, z} pins them to the same point
    in the plane normal to x.
    """
    idx = _axis_indices(axes)
    diff = np.asarray(p1, dtype=np.float64) - np.asarray(p2, dtype=np.float64)
    return np.linalg.norm(diff[..., idx], axis=-1).sum(axis=-1)


def relative_velocity_cost(p1, p2, v1, v2):
    """Root-sum-square over steps of (relative position) . (relative velocity).

    Zero when the arms move as a rigid pair: any relative motion is then
    perpendicular to the line joining the end-effectors.
    """
    dp = np.asarray(p1, dtype=np.float64) - np.asarray(p2, dtype=np.float64)
    dv = np.asarray(v1, dtype=np.float64) - np.asarray(v2, dtype=np.float64)
    dots = np.sum(dp * dv, axis=-1)
    return np.sqrt(np.sum(dots**2, axis=-1))


def position_target_cost(positions, target, mode: str = "full"):
    """Sum over steps of the distance to a fixed target point.

    mode 'full' uses the Euclidean norm; mode 'x' compares only the x
    coordinates (used when arms meet at a shared plane and only the approach
    axis matters).
    """
    p = np.asarray(positions, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise ValueError("target must be finite")
    if mode == "full":
        return np.linalg.norm(p - t, axis=-1).sum(axis=-1)
    if mode == "x":
        return np.abs(p[..., 0] - t[..., 0]).sum(axis=-1)
    raise ValueError(f"unknown mode {mode!r}")


def orientation_target_cost(quaternions, target):
    """Sum over steps of the geodesic angle to a fixed target orientation."""
    return quat_geodesic(quaternions, np.asarray(target, dtype=np.float64)).sum(axis=-1)


def paired_orientation_cost(q1, q2, target1, target2):
    """Average of both arms' orientation-target sums (half the total, so one
    fully misaligned arm is not over-counted against two slightly-off arms)."""
    return 0.5 * (orientation_target_cost(q1, target1) + orientation_target_cost(q2, target2))


def paired_position_cost(p1, p2, target1, target2, mode: str = "full"):
    """Average of both arms' position-target sums."""
    return 0.5 * (
        position_target_cost(p1, target1, mode) + position_target_cost(p2, target2, mode)
    )


def ee_distance_cost(p1, p2, length: float):
    """Sum over steps of the squared error between the end-effector separation
    and a fixed hold length."""
    if not length > 0.0:
        raise ValueError("length must be positive")
    sep = np.linalg.norm(
        np.asarray(p1, dtype=np.float64) - np.asarray(p2, dtype=np.float64), axis=-1
    )
    return ((sep - length) ** 2).sum(axis=-1)


def midpoint_alignment_cost(p1, p2, object_position, epsilon: float):
    """Sum over steps of the distance from the end-effector midpoint to a hold
    point epsilon below the object's center."""
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    c = 0.5 * (np.asarray(p1, dtype=np.float64) + np.asarray(p2, dtype=np.float64))
    target = np.asarray(object_position, dtype=np.float64) - np.array([0.0, 0.0, epsilon])
    return np.linalg.norm(c - target, axis=-1).sum(axis=-1)


def midpoint_target_cost(p1, p2, target, epsilon: float):
    """Sum over steps of the distance from the carried object's implied center
    (midpoint raised by epsilon) to the transport target."""
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    c = 0.5 * (np.asarray(p1, dtype=np.float64) + np.asarray(p2, dtype=np.float64))
    offset = c + np.array([0.0, 0.0, epsilon])
    return np.linalg.norm(offset - np.asarray(target, dtype=np.float64), axis=-1).sum(axis=-1)
