"""Joint-space trajectory types, finite differences and quaternion helpers.

A trajectory is represented by its joint-velocity sequence ``(H, D)`` plus the
starting configuration; positions are recovered by explicit Euler integration
with a fixed step ``dt``.  Higher derivatives (acceleration, jerk) come from
forward finite differences of the velocity rows, which is also the convention
used by the smoothing projection in :mod:`smppi.projection`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "VelocitySequence",
    "DerivativeBounds",
    "Pose",
    "finite_difference",
    "integrate_velocities",
    "quat_from_axis_angle",
    "quat_mul",
    "quat_conjugate",
    "quat_rotate",
    "quat_geodesic",
]

#: index of each derivative order into DerivativeBounds rows
ORDER_POSITION = 0
ORDER_VELOCITY = 1
ORDER_ACCELERATION = 2
ORDER_JERK = 3


def _as_float_array(values, name, ndim=None):
    arr = np.asarray(values, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class VelocitySequence:
    """Joint-velocity sequence ``values[k, d]`` (rad/s) over a horizon of H steps."""

    values: np.ndarray
    dt: float

    def __post_init__(self):
        values = _as_float_array(self.values, "values", ndim=2)
        if values.shape[0] < 2:
            raise ValueError("horizon must be at least 2 steps")
        if not (np.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError("dt must be positive and finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def horizon(self) -> int:
        return self.values.shape[0]

    @property
    def dof(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class DerivativeBounds:
    """Per-joint box bounds on position, velocity, acceleration and jerk.

    ``lower`` and ``upper`` have shape ``(4, D)``; row ``r`` bounds derivative
    order ``r`` (0 = position, 3 = jerk).  All entries must be finite --
    effectively unconstrained orders should use a large magnitude instead of
    infinity so downstream solvers never see inf arithmetic.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _as_float_array(self.lower, "lower", ndim=2)
        upper = _as_float_array(self.upper, "upper", ndim=2)
        if lower.shape != upper.shape or lower.shape[0] != 4:
            raise ValueError(f"bounds must both have shape (4, D), got {lower.shape} and {upper.shape}")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dof(self) -> int:
        return self.lower.shape[1]

    def order(self, r: int):
        """Return ``(lower, upper)`` arrays of shape (D,) for derivative order r."""
        if r not in (0, 1, 2, 3):
            raise ValueError(f"derivative order must be in 0..3, got {r}")
        return self.lower[r], self.upper[r]

    @classmethod
    def symmetric(cls, dof, position, velocity, acceleration, jerk):
        """Bounds of the form [-m, m] per order; each magnitude is a scalar or (D,)."""
        mags = [position, velocity, acceleration, jerk]
        upper = np.stack([np.broadcast_to(np.asarray(m, dtype=np.float64), (dof,)) for m in mags])
        return cls(lower=-upper, upper=upper.copy())

    @classmethod
    def from_limits(cls, position, velocity, acceleration, jerk):
        """Bounds from per-order ``(lower, upper)`` pairs; entries scalar or (D,)."""
        pairs = [position, velocity, acceleration, jerk]
        lowers, uppers = [], []
        dof = max(np.asarray(side).size for pair in pairs for side in pair)
        for lo, hi in pairs:
            lowers.append(np.broadcast_to(np.asarray(lo, dtype=np.float64), (dof,)))
            uppers.append(np.broadcast_to(np.asarray(hi, dtype=np.float64), (dof,)))
        return cls(lower=np.stack(lowers), upper=np.stack(uppers))


@dataclass(frozen=True)
class Pose:
    """Rigid-body pose: position (3,) and scalar-first unit quaternion (w, x, y, z)."""

    position: np.ndarray
    quaternion: np.ndarray

    def __post_init__(self):
        position = _as_float_array(self.position, "position")
        quaternion = _as_float_array(self.quaternion, "quaternion")
        if position.shape != (3,):
            raise ValueError(f"position must have shape (3,), got {position.shape}")
        if quaternion.shape != (4,):
            raise ValueError(f"quaternion must have shape (4,), got {quaternion.shape}")
        if abs(np.linalg.norm(quaternion) - 1.0) > 1e-9:
            raise ValueError("quaternion must have unit norm")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "quaternion", quaternion)


def integrate_velocities(theta0, velocities, dt=None):
    """Euler-integrate joint velocities into configurations.

    Parameters
    ----------
    theta0 : (..., D) starting configuration
    velocities : VelocitySequence or (..., H, D) array
    dt : required when ``velocities`` is a bare array

    Returns
    -------
    (..., H+1, D) array with ``out[..., 0, :] == theta0``.
    """
    if isinstance(velocities, VelocitySequence):
        vel, dt = velocities.values, velocities.dt
    else:
        vel = np.asarray(velocities, dtype=np.float64)
        if dt is None:
            raise ValueError("dt is required when velocities is a bare array")
    theta0 = np.asarray(theta0, dtype=np.float64)
    steps = dt * np.cumsum(vel, axis=-2)
    theta0 = np.broadcast_to(theta0[..., None, :], steps.shape[:-2] + (1, steps.shape[-1]))
    return np.concatenate([theta0, theta0 + steps], axis=-2)


def finite_difference(velocities, order, dt=None):
    """Forward finite differences of a velocity sequence along the horizon axis.

    order 1 returns the sequence itself (H rows), order 2 the accelerations
    ``(v[k+1] - v[k]) / dt`` (H-1 rows), order 3 the jerks
    ``(v[k+2] - 2 v[k+1] + v[k]) / dt**2`` (H-2 rows).
    """
    if isinstance(velocities, VelocitySequence):
        vel, dt = velocities.values, velocities.dt
    else:
        vel = np.asarray(velocities, dtype=np.float64)
        if dt is None:
            raise ValueError("dt is required when velocities is a bare array")
    if order == 1:
        return vel.copy()
    if order == 2:
        return np.diff(vel, axis=-2) / dt
    if order == 3:
        return np.diff(vel, n=2, axis=-2) / dt**2
    raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")


# ---------------------------------------------------------------------------
# quaternions (scalar-first, broadcasting over leading axes)


def quat_from_axis_angle(axis, angle):
    """Unit quaternion rotating by ``angle`` (rad) about ``axis`` (need not be unit)."""
    axis = np.asarray(axis, dtype=np.float64)
    angle = np.asarray(angle, dtype=np.float64)
    norm = np.linalg.norm(axis, axis=-1, keepdims=True)
    if np.any(norm == 0.0):
        raise ValueError("rotation axis must be nonzero")
    u = axis / norm
    half = angle[..., None] / 2.0
    return np.concatenate([np.cos(half), np.sin(half) * u], axis=-1)


def quat_mul(q1, q2):
    """Hamilton product, broadcasting over leading axes."""
    q1 = np.asarray(q1, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    w1, x1, y1, z1 = np.moveaxis(q1, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(q2, -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quat_conjugate(q):
    q = np.asarray(q, dtype=np.float64)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_rotate(q, v):
    """Rotate vectors ``v`` (..., 3) by unit quaternions ``q`` (..., 4)."""
    q = np.asarray(q, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    w = q[..., :1]
    u = q[..., 1:]
    # v + 2 w (u x v) + 2 u x (u x v): two cross products beat building matrices
    uv = np.cross(u, v)
    return v + 2.0 * (w * uv + np.cross(u, uv))


def quat_geodesic(q1, q2):
    """Geodesic angle (rad) between unit quaternions, broadcasting over leading axes.

    Antipodal representations of the same rotation give 0; the result lies in
    [0, pi].  Inputs are checked to be unit within 1e-6.
    """
    q1 = np.asarray(q1, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    for q, name in ((q1, "q1"), (q2, "q2")):
        norms = np.linalg.norm(q, axis=-1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError(f"{name} must contain unit quaternions")
    dot = np.abs(np.sum(q1 * q2, axis=-1))
    return 2.0 * np.arccos(np.clip(dot, -1.0, 1.0))
