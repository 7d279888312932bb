"""Signed-distance primitives checked against hand values and dense sampling."""

import numpy as np
import pytest

from smppi.geometry import (
    capsule_box,
    capsule_capsule,
    capsule_sphere,
    point_box_signed,
    point_segment_distance,
    segment_box_signed,
    segment_segment_distance,
    sphere_box,
    sphere_sphere,
)
from smppi.trajectory import quat_from_axis_angle


def dense_segment_min(fn, a0, a1, n=20001):
    """Minimise a pointwise distance along a segment by brute-force sampling."""
    t = np.linspace(0.0, 1.0, n)
    pts = a0 + t[:, None] * (a1 - a0)
    return fn(pts).min()


# -- hand-checked values -------------------------------------------------------


def test_point_segment_hand_values():
    assert point_segment_distance([0.0, 1.0, 0.0], [-1.0, 0, 0], [1.0, 0, 0]) == 1.0
    assert point_segment_distance([2.0, 0.0, 0.0], [-1.0, 0, 0], [1.0, 0, 0]) == 1.0
    # degenerate segment: plain point distance
    assert point_segment_distance([3.0, 4.0, 0.0], [0.0, 0, 0], [0.0, 0, 0]) == 5.0


def test_parallel_capsules():
    d = capsule_capsule([0, 0, 0.0], [1, 0, 0.0], 0.05, [0, 0.2, 0.0], [1, 0.2, 0.0], 0.05)
    assert abs(d - 0.10) < 1e-15


def test_crossing_segments_touch():
    d = segment_segment_distance([-1, 0, 0.0], [1, 0, 0.0], [0, -1, 0.0], [0, 1, 0.0])
    assert d == 0.0


def test_skew_segments():
    # closest points are the midpoints, one unit apart in z
    d = segment_segment_distance([-1, 0, 0.0], [1, 0, 0.0], [0, -1, 1.0], [0, 1, 1.0])
    assert abs(d - 1.0) < 1e-15


def test_concentric_spheres_penetration():
    assert sphere_sphere([0, 0, 0.0], 0.3, [0, 0, 0.0], 0.2) == -0.5


def test_capsule_sphere_hand_value():
    d = capsule_sphere([0, 0, 0.0], [1, 0, 0.0], 0.1, [0.5, 0.5, 0.0], 0.2)
    assert abs(d - 0.2) < 1e-15


def test_point_box_inside_outside_corner():
    half = np.array([1.0, 2.0, 3.0])
    assert point_box_signed([0.0, 0, 0], [0.0, 0, 0], half) == -1.0
    assert point_box_signed([0.0, 0, 3.5], [0.0, 0, 0], half) == 0.5
    corner = point_box_signed([2.0, 3.0, 4.0], [0.0, 0, 0], half)
    assert abs(corner - np.sqrt(3.0)) < 1e-15
    # nearest face governs inside, not nearest corner
    assert point_box_signed([0.9, 0, 0.0], [0.0, 0, 0], half) == pytest.approx(-0.1, abs=1e-15)


def test_point_box_rotated():
    quat = quat_from_axis_angle([0.0, 0, 1.0], np.pi / 2)
    # box extents (1, 2, 1) rotated 90 deg about z: world x now sees the 2-extent
    d = point_box_signed([2.5, 0.0, 0.0], [0.0, 0, 0], [1.0, 2.0, 1.0], quat)
    assert abs(d - 0.5) < 1e-12


def test_sphere_box_touching():
    assert abs(sphere_box([0.0, 0, 2.0], 0.5, [0.0, 0, 0], [1.0, 1.0, 1.0]) - 0.5) < 1e-15


# -- dense-sampling cross-checks ----------------------------------------------


def test_segment_segment_matches_dense_sampling():
    rng = np.random.default_rng(10)
    for _ in range(200):
        a0, a1, b0, b1 = rng.uniform(-1.0, 1.0, (4, 3))
        d = segment_segment_distance(a0, a1, b0, b1)
        ref = dense_segment_min(lambda p: point_segment_distance(p, b0, b1), a0, a1)
        assert d <= ref + 1e-12
        assert d >= ref - 1e-4


def test_segment_segment_parallel_cases():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a0, a1 = rng.uniform(-1.0, 1.0, (2, 3))
        shift = rng.uniform(-0.5, 0.5, 3)
        lam = rng.uniform(1.2, 2.0)
        b0 = a0 + shift
        b1 = b0 + lam * (a1 - a0)  # parallel, longer
        d = segment_segment_distance(a0, a1, b0, b1)
        ref = dense_segment_min(lambda p: point_segment_distance(p, b0, b1), a0, a1)
        assert abs(d - ref) < 1e-4


def test_segment_segment_degenerate_matches_point_distance():
    rng = np.random.default_rng(12)
    for _ in range(50):
        p, b0, b1 = rng.uniform(-1.0, 1.0, (3, 3))
        d = segment_segment_distance(p, p, b0, b1)
        assert abs(d - point_segment_distance(p, b0, b1)) < 1e-12
        both = segment_segment_distance(p, p, b0, b0)
        assert both == pytest.approx(np.linalg.norm(p - b0), rel=1e-14)


def test_segment_box_matches_dense_sampling():
    rng = np.random.default_rng(13)
    for _ in range(100):
        a0, a1 = rng.uniform(-1.5, 1.5, (2, 3))
        center = rng.uniform(-0.5, 0.5, 3)
        half = rng.uniform(0.2, 0.8, 3)
        axis = rng.normal(size=3)
        quat = quat_from_axis_angle(axis / np.linalg.norm(axis), rng.uniform(0, np.pi))
        d = segment_box_signed(a0, a1, center, half, quat)
        ref = dense_segment_min(lambda p: point_box_signed(p, center, half, quat), a0, a1)
        assert d <= ref + 1e-10
        assert d >= ref - 1e-4


def test_capsule_box_is_segment_distance_minus_radius():
    rng = np.random.default_rng(14)
    a0, a1 = rng.uniform(-1.0, 1.0, (2, 3))
    seg = segment_box_signed(a0, a1, [0.0, 0, 0], [0.5, 0.5, 0.5])
    assert capsule_box(a0, a1, 0.07, [0.0, 0, 0], [0.5, 0.5, 0.5]) == seg - 0.07


# -- symmetry and broadcasting -------------------------------------------------


def test_segment_segment_symmetry():
    rng = np.random.default_rng(15)
    for _ in range(50):
        a0, a1, b0, b1 = rng.uniform(-1.0, 1.0, (4, 3))
        d1 = segment_segment_distance(a0, a1, b0, b1)
        d2 = segment_segment_distance(b0, b1, a0, a1)
        assert abs(d1 - d2) < 1e-12
        # orientation of either segment does not matter
        assert abs(segment_segment_distance(a1, a0, b0, b1) - d1) < 1e-12


def test_broadcasting_shapes():
    a0 = np.zeros((5, 1, 3))
    a1 = np.ones((5, 1, 3))
    b0 = np.zeros((4, 3))
    b1 = np.full((4, 3), 0.5)
    assert segment_segment_distance(a0, a1, b0, b1).shape == (5, 4)
    p = np.zeros((7, 3))
    assert point_box_signed(p, [0.0, 0, 0], [1.0, 1, 1]).shape == (7,)
    assert segment_box_signed(a0, a1, [0.0, 0, 0], [1.0, 1, 1]).shape == (5, 1)


def test_batch_matches_scalar_calls():
    rng = np.random.default_rng(16)
    a0, a1, b0, b1 = rng.uniform(-1.0, 1.0, (4, 8, 3))
    batch = segment_segment_distance(a0, a1, b0, b1)
    for i in range(8):
        assert batch[i] == segment_segment_distance(a0[i], a1[i], b0[i], b1[i])
