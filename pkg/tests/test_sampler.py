"""Sampling distribution, elite selection and the weighted update rule."""

import numpy as np
import pytest

from smppi.sampler import (
    DegenerateBatchError,
    GaussianPolicy,
    MppiConfig,
    policy_rng,
    select_elite,
    update,
)


# -- counter-based rng --------------------------------------------------------


def test_policy_rng_repeatable():
    a = policy_rng(7, cycle=3, iteration=2).standard_normal(8)
    b = policy_rng(7, cycle=3, iteration=2).standard_normal(8)
    assert np.array_equal(a, b)


def test_policy_rng_streams_distinct():
    base = policy_rng(7).standard_normal(8)
    for kwargs in ({"cycle": 1}, {"iteration": 1}, {"cycle": 1, "iteration": 1}):
        other = policy_rng(7, **kwargs).standard_normal(8)
        assert not np.array_equal(base, other)
    assert not np.array_equal(base, policy_rng(8).standard_normal(8))


# -- policy construction and sampling -----------------------------------------


def test_policy_validation():
    with pytest.raises(ValueError):
        GaussianPolicy(mean=np.zeros(4), variance=np.zeros(4))  # 1-d
    with pytest.raises(ValueError):
        GaussianPolicy(mean=np.zeros((4, 2)), variance=np.zeros((4, 3)))
    with pytest.raises(ValueError):
        GaussianPolicy(mean=np.full((2, 2), np.nan), variance=np.ones((2, 2)))
    with pytest.raises(ValueError):
        GaussianPolicy(mean=np.zeros((2, 2)), variance=np.ones((2, 2)), sigma_floor=0.0)


def test_variance_floor_applied_on_construction():
    p = GaussianPolicy(mean=np.zeros((3, 2)), variance=np.zeros((3, 2)), sigma_floor=0.05)
    assert np.all(p.variance == 0.05**2)


def test_sample_deterministic_given_rng():
    p = GaussianPolicy.zero(5, 3)
    a = p.sample(4, policy_rng(0))
    b = p.sample(4, policy_rng(0))
    assert a.shape == (4, 5, 3)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        p.sample(0, policy_rng(0))


def test_sample_concentrates_at_floor():
    floor = 1e-6
    mean = np.linspace(-1.0, 1.0, 8).reshape(4, 2)
    p = GaussianPolicy(mean=mean, variance=np.zeros((4, 2)), sigma_floor=floor)
    draws = p.sample(64, policy_rng(1))
    assert np.all(np.abs(draws - mean) < 6 * floor)


def test_sample_moments_match_distribution():
    p = GaussianPolicy(mean=np.zeros((2, 2)), variance=np.ones((2, 2)), sigma_floor=0.02)
    draws = p.sample(10000, policy_rng(2))
    assert np.all(np.abs(draws.mean(axis=0)) < 0.05)
    assert np.all(np.abs(draws.var(axis=0) - 1.0) < 0.1)


# -- elite selection -----------------------------------------------------------


def test_select_elite_orders_by_cost():
    assert select_elite(np.array([3.0, 1.0, 2.0]), 2).tolist() == [1, 2]


def test_select_elite_ties_break_by_index():
    assert select_elite(np.array([5.0, 5.0, 5.0]), 2).tolist() == [0, 1]


def test_select_elite_skips_nan_and_inf():
    costs = np.array([np.nan, 2.0, np.inf, 1.0])
    assert select_elite(costs, 2).tolist() == [3, 1]


def test_select_elite_all_bad_raises():
    with pytest.raises(DegenerateBatchError):
        select_elite(np.array([np.nan, np.inf, np.inf]), 1)


def test_select_elite_validation():
    with pytest.raises(ValueError):
        select_elite(np.zeros((2, 2)), 1)
    with pytest.raises(ValueError):
        select_elite(np.array([1.0, 2.0]), 3)
    with pytest.raises(ValueError):
        select_elite(np.array([1.0, 2.0]), 0)


# -- update rule ---------------------------------------------------------------


def _policy(H=3, D=2, sigma=0.5, floor=0.02):
    return GaussianPolicy.zero(H, D, sigma=sigma, sigma_floor=floor)


def test_update_full_step_single_elite():
    p = _policy()
    x = np.arange(6.0).reshape(1, 3, 2)
    out = update(p, x, np.array([4.2]), eta=1.0, beta=1.0)
    assert np.array_equal(out.mean, x[0])
    # spread around the new mean is zero, so the floor takes over exactly
    assert np.all(out.variance == p.sigma_floor**2)


def test_update_equal_costs_average():
    p = _policy()
    a = np.ones((3, 2))
    b = 3.0 * np.ones((3, 2))
    out = update(p, np.stack([a, b]), np.array([7.0, 7.0]), eta=1.0, beta=1.0)
    assert np.allclose(out.mean, 2.0, atol=1e-15)
    # both elites sit 1.0 from the mean in every coordinate
    assert np.allclose(out.variance, 1.0, atol=1e-15)


def test_update_small_beta_snaps_to_best():
    p = _policy()
    best = np.full((3, 2), 0.6)
    worse = np.full((3, 2), -4.0)
    out = update(p, np.stack([worse, best]), np.array([2.0, 1.0]), eta=0.25, beta=1e-6)
    assert np.allclose(out.mean, 0.75 * p.mean + 0.25 * best, atol=1e-12)


def test_update_huge_beta_unweighted_average():
    p = _policy()
    rng = np.random.default_rng(3)
    elites = rng.normal(size=(5, 3, 2))
    out = update(p, elites, rng.uniform(0.0, 3.0, 5), eta=1.0, beta=1e12)
    assert np.allclose(out.mean, elites.mean(axis=0), atol=1e-10)


def test_update_cost_baseline_shift_is_bitwise_invariant():
    p = _policy()
    rng = np.random.default_rng(4)
    elites = rng.normal(size=(3, 3, 2))
    costs = np.array([1.0, 1.5, 3.0])
    a = update(p, elites, costs, eta=0.8, beta=1.0)
    b = update(p, elites, costs + 2.0, eta=0.8, beta=1.0)
    assert np.array_equal(a.mean, b.mean)
    assert np.array_equal(a.variance, b.variance)


def test_update_identical_elites_hit_variance_floor():
    p = _policy()
    x = np.full((4, 3, 2), 0.3)
    out = update(p, x, np.array([1.0, 2.0, 3.0, 4.0]), eta=1.0, beta=0.5)
    assert np.allclose(out.mean, 0.3, atol=1e-15)
    assert np.all(out.variance == p.sigma_floor**2)


def test_update_mean_stays_in_convex_hull():
    p = _policy()
    rng = np.random.default_rng(5)
    elites = rng.normal(size=(6, 3, 2))
    out = update(p, elites, rng.uniform(0.0, 2.0, 6), eta=1.0, beta=0.7)
    assert np.all(out.mean >= elites.min(axis=0) - 1e-12)
    assert np.all(out.mean <= elites.max(axis=0) + 1e-12)


def test_update_partial_step_blends_old_mean():
    p = GaussianPolicy(mean=np.full((2, 2), 2.0), variance=np.ones((2, 2)))
    x = np.zeros((1, 2, 2))
    out = update(p, x, np.array([1.0]), eta=0.25, beta=1.0)
    assert np.allclose(out.mean, 1.5, atol=1e-15)
    # variance: 0.75 * 1.0 + 0.25 * (0 - 1.5)^2
    assert np.allclose(out.variance, 0.75 + 0.25 * 2.25, atol=1e-15)


def test_update_validation():
    p = _policy()
    good = np.zeros((2, 3, 2))
    with pytest.raises(ValueError):
        update(p, np.zeros((2, 4, 2)), np.array([1.0, 2.0]), eta=1.0, beta=1.0)
    with pytest.raises(ValueError):
        update(p, good, np.array([1.0]), eta=1.0, beta=1.0)
    with pytest.raises(ValueError):
        update(p, good, np.array([1.0, np.inf]), eta=1.0, beta=1.0)
    with pytest.raises(ValueError):
        update(p, good, np.array([1.0, 2.0]), eta=0.0, beta=1.0)
    with pytest.raises(ValueError):
        update(p, good, np.array([1.0, 2.0]), eta=1.0, beta=0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        MppiConfig(n_elite=0)
    with pytest.raises(ValueError):
        MppiConfig(n_samples=8, n_elite=9)
    with pytest.raises(ValueError):
        MppiConfig(n_iterations=0)
    with pytest.raises(ValueError):
        MppiConfig(eta=1.5)
    with pytest.raises(ValueError):
        MppiConfig(beta=0.0)
