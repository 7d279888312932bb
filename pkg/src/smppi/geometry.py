"""Batched signed distances between capsules, spheres and boxes.

All functions broadcast over arbitrary leading axes; points are (..., 3).
Sign convention: positive = separated by that much, negative = penetration
depth.  Capsule-vs-X distances are segment-vs-X distances minus the radii, so
they are exact for spheres and other capsules.  For boxes the segment distance
minimises the box's signed distance field along the segment; that restriction
is quasiconvex (outside the box it is the convex distance-to-a-convex-set,
inside it is the convex max of face planes, and the two pieces join at zero),
so a fixed-count golden-section search converges unconditionally.
"""

from __future__ import annotations

import numpy as np

from .trajectory import quat_conjugate, quat_rotate

__all__ = [
    "point_segment_distance",
    "segment_segment_distance",
    "point_box_signed",
    "segment_box_signed",
    "capsule_capsule",
    "capsule_sphere",
    "capsule_box",
    "sphere_sphere",
    "sphere_box",
]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
_BOX_ITERS = 80  # interval shrinks by 0.618^80 ~ 2e-17: exact to double precision


def point_segment_distance(p, a0, a1):
    """Distance from points ``p`` to segments ``a0``-``a1``."""
    p, a0, a1 = np.broadcast_arrays(np.asarray(p, float), np.asarray(a0, float), np.asarray(a1, float))
    d = a1 - a0
    dd = np.sum(d * d, axis=-1)
    t = np.sum((p - a0) * d, axis=-1) / np.where(dd > 0.0, dd, 1.0)
    t = np.clip(np.where(dd > 0.0, t, 0.0), 0.0, 1.0)
    closest = a0 + t[..., None] * d
    return np.linalg.norm(p - closest, axis=-1)


def segment_segment_distance(a0, a1, b0, b1):
    """Minimum distance between segments a0-a1 and b0-b1 (closed form).

    Standard clamped closest-point computation; handles degenerate (point)
    segments and the parallel case.
    """
    a0, a1, b0, b1 = np.broadcast_arrays(
        np.asarray(a0, float), np.asarray(a1, float), np.asarray(b0, float), np.asarray(b1, float)
    )
    d1 = a1 - a0
    d2 = b1 - b0
    r = a0 - b0
    a = np.sum(d1 * d1, axis=-1)
    e = np.sum(d2 * d2, axis=-1)
    f = np.sum(d2 * r, axis=-1)
    c = np.sum(d1 * r, axis=-1)
    b = np.sum(d1 * d2, axis=-1)
    denom = a * e - b * b

    safe = lambda x: np.where(x > 0.0, x, 1.0)
    # unclamped candidate on the first segment, zero for parallel/degenerate
    s = np.where(denom > 0.0, np.clip((b * f - c * e) / safe(denom), 0.0, 1.0), 0.0)
    t_raw = np.where(e > 0.0, (b * s + f) / safe(e), 0.0)
    t = np.clip(t_raw, 0.0, 1.0)
    # where t needed clamping, re-minimise s for the clamped t
    s_re = np.clip((b * t - c) / safe(a), 0.0, 1.0)
    s = np.where((t_raw != t) & (a > 0.0), s_re, s)
    s = np.where(a > 0.0, s, 0.0)
    p1 = a0 + s[..., None] * d1
    p2 = b0 + t[..., None] * d2
    return np.linalg.norm(p1 - p2, axis=-1)


def point_box_signed(p, center, half_extents, quat=None):
    """Signed distance from points to an (optionally oriented) box.

    Negative inside, with magnitude the distance to the nearest face.
    ``quat`` rotates the box from its local axes into the world frame.
    """
    p = np.asarray(p, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    half = np.asarray(half_extents, dtype=np.float64)
    q = p - center
    if quat is not None:
        q = quat_rotate(quat_conjugate(np.asarray(quat, float)), q)
    d = np.abs(q) - half
    outside = np.linalg.norm(np.maximum(d, 0.0), axis=-1)
    inside = np.minimum(np.max(d, axis=-1), 0.0)
    return outside + inside


def segment_box_signed(a0, a1, center, half_extents, quat=None):
    """Minimum signed box distance over the segment a0-a1 (golden-section search)."""
    a0 = np.asarray(a0, dtype=np.float64)
    a1 = np.asarray(a1, dtype=np.float64)

    def phi(t):
        pts = a0 + t[..., None] * (a1 - a0)
        return point_box_signed(pts, center, half_extents, quat)

    shape = np.broadcast_shapes(
        a0.shape[:-1],
        a1.shape[:-1],
        np.asarray(center, float).shape[:-1],
        np.asarray(half_extents, float).shape[:-1],
    )
    lo = np.zeros(shape)
    hi = np.ones(shape)
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1 = phi(x1)
    f2 = phi(x2)
    for _ in range(_BOX_ITERS):
        left = f1 < f2  # minimum bracketed in [lo, x2] (else in [x1, hi])
        new_hi = np.where(left, x2, hi)
        new_lo = np.where(left, lo, x1)
        new_x1 = np.where(left, new_hi - _GOLDEN * (new_hi - new_lo), x2)
        new_x2 = np.where(left, x1, new_lo + _GOLDEN * (new_hi - new_lo))
        fx = phi(np.where(left, new_x1, new_x2))
        f1, f2 = np.where(left, fx, f2), np.where(left, f1, fx)
        lo, hi, x1, x2 = new_lo, new_hi, new_x1, new_x2
    best = phi(0.5 * (lo + hi))
    ends = np.minimum(phi(np.zeros(shape)), phi(np.ones(shape)))
    return np.minimum(best, ends)


def capsule_capsule(a0, a1, ra, b0, b1, rb):
    """Signed distance between capsules (segment + radius)."""
    return segment_segment_distance(a0, a1, b0, b1) - np.asarray(ra) - np.asarray(rb)


def capsule_sphere(a0, a1, ra, center, rs):
    return point_segment_distance(center, a0, a1) - np.asarray(ra) - np.asarray(rs)


def capsule_box(a0, a1, ra, center, half_extents, quat=None):
    return segment_box_signed(a0, a1, center, half_extents, quat) - np.asarray(ra)


def sphere_sphere(c1, r1, c2, r2):
    c1 = np.asarray(c1, dtype=np.float64)
    c2 = np.asarray(c2, dtype=np.float64)
    return np.linalg.norm(c1 - c2, axis=-1) - np.asarray(r1) - np.asarray(r2)


def sphere_box(center, r, box_center, half_extents, quat=None):
    return point_box_signed(center, box_center, half_extents, quat) - np.asarray(r)
