"""Finite differences, Euler integration, and quaternion helpers."""

import numpy as np
import pytest

from smppi.trajectory import (
    DerivativeBounds,
    Pose,
    VelocitySequence,
    finite_difference,
    integrate_velocities,
    quat_conjugate,
    quat_from_axis_angle,
    quat_geodesic,
    quat_mul,
    quat_rotate,
)


def test_finite_difference_constant_sequence_is_zero():
    seq = VelocitySequence(np.full((6, 2), 1.0), dt=0.1)
    assert np.all(finite_difference(seq, 2) == 0.0)
    assert np.all(finite_difference(seq, 3) == 0.0)


def test_finite_difference_hand_values():
    # velocity rows 0.0, 0.1, 0.3 at dt=0.1
    seq = VelocitySequence(np.array([[0.0], [0.1], [0.3]]), dt=0.1)
    acc = finite_difference(seq, 2)
    jerk = finite_difference(seq, 3)
    assert np.allclose(acc, [[1.0], [2.0]], atol=1e-12)
    assert np.allclose(jerk, [[10.0]], atol=1e-12)


def test_finite_difference_order_one_is_a_copy():
    seq = VelocitySequence(np.array([[1.0], [2.0]]), dt=0.1)
    out = finite_difference(seq, 1)
    out[0, 0] = 99.0
    assert seq.values[0, 0] == 1.0


def test_finite_difference_is_linear():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(7, 3))
    b = rng.normal(size=(7, 3))
    for order in (2, 3):
        lhs = finite_difference(2.0 * a - 0.5 * b, order, dt=0.1)
        rhs = 2.0 * finite_difference(a, order, dt=0.1) - 0.5 * finite_difference(b, order, dt=0.1)
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_finite_difference_rejects_bad_order():
    seq = VelocitySequence(np.zeros((4, 1)), dt=0.1)
    with pytest.raises(ValueError):
        finite_difference(seq, 4)
    with pytest.raises(ValueError):
        finite_difference(np.zeros((4, 1)), 2)  # bare array without dt


def test_integrate_velocities_zero_stays_at_theta0():
    theta0 = np.array([0.3, -1.2])
    pos = integrate_velocities(theta0, np.zeros((5, 2)), dt=0.1)
    assert pos.shape == (6, 2)
    assert np.all(pos == theta0)


def test_integrate_velocities_hand_values():
    pos = integrate_velocities(np.array([0.0]), np.array([[1.0], [1.0]]), dt=0.1)
    assert np.allclose(pos, [[0.0], [0.1], [0.2]], atol=1e-12)
    pos = integrate_velocities(np.array([np.pi]), np.array([[-1.0]]), dt=0.5)
    assert np.allclose(pos, [[np.pi], [np.pi - 0.5]], atol=1e-12)


def test_integration_differentiation_round_trip():
    rng = np.random.default_rng(11)
    vel = rng.normal(size=(9, 4))
    pos = integrate_velocities(rng.normal(size=4), vel, dt=0.1)
    recovered = np.diff(pos, axis=0) / 0.1
    assert np.allclose(recovered, vel, atol=1e-12)


def test_integrate_velocities_batched():
    rng = np.random.default_rng(12)
    vel = rng.normal(size=(5, 6, 2))
    pos = integrate_velocities(np.zeros(2), vel, dt=0.2)
    assert pos.shape == (5, 7, 2)
    single = integrate_velocities(np.zeros(2), vel[3], dt=0.2)
    assert np.array_equal(pos[3], single)


def test_velocity_sequence_validation():
    with pytest.raises(ValueError):
        VelocitySequence(np.zeros((1, 2)), dt=0.1)  # horizon too short
    with pytest.raises(ValueError):
        VelocitySequence(np.zeros((3, 2)), dt=0.0)
    with pytest.raises(ValueError):
        VelocitySequence(np.array([[np.inf], [0.0]]), dt=0.1)
    seq = VelocitySequence(np.zeros((4, 3)), dt=0.1)
    assert seq.horizon == 4 and seq.dof == 3


def test_derivative_bounds_validation():
    with pytest.raises(ValueError):
        DerivativeBounds(lower=np.ones((4, 2)), upper=np.zeros((4, 2)))
    with pytest.raises(ValueError):
        DerivativeBounds(lower=np.zeros((3, 2)), upper=np.ones((3, 2)))
    b = DerivativeBounds.symmetric(2, position=3.0, velocity=1.0, acceleration=5.0, jerk=50.0)
    lo, hi = b.order(1)
    assert np.all(lo == -1.0) and np.all(hi == 1.0)
    with pytest.raises(ValueError):
        b.order(4)


def test_derivative_bounds_from_limits_broadcasts():
    b = DerivativeBounds.from_limits(
        position=(-3.0, 3.0),
        velocity=([-1.0, -2.0], [1.0, 2.0]),
        acceleration=(-5.0, 5.0),
        jerk=(-50.0, 50.0),
    )
    assert b.dof == 2
    assert np.array_equal(b.order(1)[1], [1.0, 2.0])


def test_pose_validation():
    with pytest.raises(ValueError):
        Pose(np.zeros(3), np.array([1.0, 0.0, 0.0, 1e-3]))
    with pytest.raises(ValueError):
        Pose(np.zeros(2), np.array([1.0, 0.0, 0.0, 0.0]))


def test_quat_geodesic_basics():
    rng = np.random.default_rng(5)
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    assert quat_geodesic(q, q) == 0.0
    assert quat_geodesic(q, -q) == 0.0
    quarter_z = quat_from_axis_angle([0.0, 0.0, 1.0], np.pi / 2)
    assert abs(quat_geodesic([1.0, 0.0, 0.0, 0.0], quarter_z) - np.pi / 2) < 1e-12


def test_quat_geodesic_symmetry_and_left_invariance():
    rng = np.random.default_rng(6)
    qs = rng.normal(size=(20, 4))
    qs /= np.linalg.norm(qs, axis=-1, keepdims=True)
    g = rng.normal(size=4)
    g /= np.linalg.norm(g)
    for q1, q2 in zip(qs[:10], qs[10:]):
        d12 = quat_geodesic(q1, q2)
        assert abs(d12 - quat_geodesic(q2, q1)) < 1e-12
        left = quat_geodesic(quat_mul(g, q1), quat_mul(g, q2))
        assert abs(d12 - left) < 1e-9
        assert 0.0 <= d12 <= np.pi + 1e-12


def test_quat_geodesic_rejects_non_unit():
    with pytest.raises(ValueError):
        quat_geodesic([2.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0])


def test_quat_rotate_matches_rotation_matrix():
    rng = np.random.default_rng(7)
    for _ in range(25):
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        w, x, y, z = q
        R = np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )
        v = rng.normal(size=3)
        assert np.allclose(quat_rotate(q, v), R @ v, atol=1e-12)


def test_quat_mul_identity_and_conjugate_inverse():
    rng = np.random.default_rng(8)
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    identity = np.array([1.0, 0.0, 0.0, 0.0])
    assert np.allclose(quat_mul(identity, q), q, atol=1e-15)
    assert np.allclose(quat_mul(q, quat_conjugate(q)), identity, atol=1e-12)


def test_quat_from_axis_angle_quarter_turn():
    q = quat_from_axis_angle([0.0, 0.0, 2.0], np.pi / 2)  # non-unit axis is fine
    assert np.allclose(quat_rotate(q, [1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-12)
    with pytest.raises(ValueError):
        quat_from_axis_angle([0.0, 0.0, 0.0], 1.0)
