"""Gaussian sampling distribution, elite selection and the weighted update.

The optimizer keeps an independent normal distribution per (time step, joint)
coordinate -- mean ``nu`` and per-coordinate ``variance`` -- rather than a full
covariance over the horizon.  Temporal smoothness is supplied downstream by the
:mod:`smppi.projection` step, so the distribution only has to steer amplitudes.

Randomness is counter-based (Philox keyed by the run seed, with the replanning
cycle and optimizer iteration in the counter words), so every batch is
reproducible no matter how rollouts are parallelised later.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateBatchError",
    "GaussianPolicy",
    "MppiConfig",
    "policy_rng",
    "select_elite",
    "update",
]


class DegenerateBatchError(RuntimeError):
    """Raised when every sample in a batch has infinite (or NaN) cost."""


@dataclass(frozen=True)
class MppiConfig:
    """Optimizer hyper-parameters: batch size, elite count, iterations, update gains."""

    n_samples: int = 1024
    n_elite: int = 64
    n_iterations: int = 10
    eta: float = 0.8
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_elite <= self.n_samples:
            raise ValueError("need 1 <= n_elite <= n_samples")
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be >= 1")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must be in (0, 1]")
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")


def policy_rng(seed, cycle=0, iteration=0):
    """Deterministic generator for one (cycle, iteration) of one run.

    Philox is counter-based: distinct (cycle, iteration) pairs index disjoint
    streams of the same keyed generator, so draws never overlap across
    replanning cycles or optimizer iterations.
    """
    counter = np.array([0, 0, int(cycle), int(iteration)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=np.uint64(seed), counter=counter))


@dataclass(frozen=True)
class GaussianPolicy:
    """Diagonal Gaussian over velocity sequences: per-coordinate mean and variance.

    ``variance`` is clamped to at least ``sigma_floor**2`` on construction, so
    the distribution can never collapse to a point across replanning cycles.
    """

    mean: np.ndarray
    variance: np.ndarray
    sigma_floor: float = 0.02

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        variance = np.asarray(self.variance, dtype=np.float64)
        if mean.ndim != 2 or variance.shape != mean.shape:
            raise ValueError("mean and variance must share shape (H, D)")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(variance))):
            raise ValueError("policy parameters must be finite")
        if self.sigma_floor <= 0.0:
            raise ValueError("sigma_floor must be positive")
        variance = np.maximum(variance, self.sigma_floor**2)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variance", variance)

    @property
    def horizon(self) -> int:
        return self.mean.shape[0]

    @property
    def dof(self) -> int:
        return self.mean.shape[1]

    @classmethod
    def zero(cls, horizon, dof, sigma=0.5, sigma_floor=0.02):
        return cls(
            mean=np.zeros((horizon, dof)),
            variance=np.full((horizon, dof), float(sigma) ** 2),
            sigma_floor=sigma_floor,
        )

    def sample(self, n, rng) -> np.ndarray:
        """Draw ``n`` velocity sequences, shape (n, H, D), from the diagonal normal."""
        if n < 1:
            raise ValueError("n must be >= 1")
        noise = rng.standard_normal(size=(n,) + self.mean.shape)
        return self.mean + np.sqrt(self.variance) * noise


def select_elite(costs, n_elite):
    """Indices of the ``n_elite`` lowest costs, ascending, ties broken by index.

    NaN costs are treated as +infinity and never selected.  If no sample has a
    finite cost the batch carries no information and DegenerateBatchError is
    raised.
    """
    costs = np.asarray(costs, dtype=np.float64)
    if costs.ndim != 1:
        raise ValueError("costs must be one-dimensional")
    if not 1 <= n_elite <= costs.shape[0]:
        raise ValueError("need 1 <= n_elite <= len(costs)")
    clean = np.where(np.isnan(costs), np.inf, costs)
    if not np.any(np.isfinite(clean)):
        raise DegenerateBatchError("all sample costs are infinite")
    order = np.argsort(clean, kind="stable")
    return order[:n_elite]


def update(policy, elite_samples, elite_costs, eta, beta):
    """Exponentially-weighted policy update from the elite set.

    Weights are ``exp(-(c_j - min c) / beta)``; the baseline shift leaves the
    ratios unchanged and guarantees the best sample has weight one, so the
    normaliser can never underflow.  The new mean blends the old one with the
    weighted elite average; the new per-coordinate variance blends with the
    weighted spread around the *new* mean and is floored at sigma_floor^2.
    """
    elite_samples = np.asarray(elite_samples, dtype=np.float64)
    elite_costs = np.asarray(elite_costs, dtype=np.float64)
    if elite_samples.ndim != 3 or elite_samples.shape[1:] != policy.mean.shape:
        raise ValueError("elite_samples must have shape (n_e, H, D) matching the policy")
    if elite_costs.shape != (elite_samples.shape[0],) or elite_costs.shape[0] < 1:
        raise ValueError("elite_costs must have one finite entry per elite sample")
    if not np.all(np.isfinite(elite_costs)):
        raise ValueError("elite costs must be finite")
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must be in (0, 1]")
    if beta <= 0.0:
        raise ValueError("beta must be positive")

    s = np.exp(-(elite_costs - elite_costs.min()) / beta)
    s = s / s.sum()
    weighted_mean = np.einsum("j,jhd->hd", s, elite_samples)
    mean = (1.0 - eta) * policy.mean + eta * weighted_mean
    spread = np.einsum("j,jhd->hd", s, (elite_samples - mean) ** 2)
    variance = (1.0 - eta) * policy.variance + eta * spread
    return GaussianPolicy(mean=mean, variance=variance, sigma_floor=policy.sigma_floor)
