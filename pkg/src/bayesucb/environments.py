"""Reward generators and the linear action-set constructor.

Every environment splits reward sampling into two steps: ``draw_noise``
produces primitive variates (standard normals or uniforms) and ``rewards``
maps mean rewards plus those variates to observations. The simulator uses the
split to feed identical variates to competing policies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BanditInstance, FeaturizedActions, as_generator


@dataclass(frozen=True)
class GaussianNoise:
    sigma: float
    kind = "gaussian"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def draw_noise(self, gen: np.random.Generator, size) -> np.ndarray:
        return gen.standard_normal(size)

    def rewards(self, means, noise):
        return means + self.sigma * noise


@dataclass(frozen=True)
class LinearGaussianNoise(GaussianNoise):
    kind = "linear"


@dataclass(frozen=True)
class RademacherNoise:
    """Noise is +sigma or -sigma with equal probability."""

    sigma: float
    kind = "rademacher"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def draw_noise(self, gen: np.random.Generator, size) -> np.ndarray:
        return gen.random(size)

    def rewards(self, means, noise):
        return means + np.where(noise < 0.5, self.sigma, -self.sigma)


@dataclass(frozen=True)
class BernoulliReward:
    kind = "bernoulli"

    def draw_noise(self, gen: np.random.Generator, size) -> np.ndarray:
        return gen.random(size)

    def rewards(self, means, noise):
        return np.asarray(noise < means, dtype=float)


NoiseModel = GaussianNoise | LinearGaussianNoise | RademacherNoise | BernoulliReward


@dataclass(frozen=True)
class Environment:
    """A noise model bound to one bandit instance."""

    noise: NoiseModel
    instance: BanditInstance

    def __post_init__(self):
        linear = isinstance(self.noise, LinearGaussianNoise)
        featurized = isinstance(self.instance.action_set, FeaturizedActions)
        if linear != featurized:
            raise TypeError(f"{type(self.noise).__name__} cannot drive a "
                            f"{type(self.instance.action_set).__name__} instance")
        if isinstance(self.noise, BernoulliReward):
            m = self.instance.mean_rewards()
            if np.any(m < 0) or np.any(m > 1):
                raise ValueError("Bernoulli means must lie in [0, 1]")

    @property
    def K(self) -> int:
        return self.instance.K

    def sample_reward(self, action: int, rng) -> float:
        if not 0 <= action < self.K:
            raise IndexError(f"action {action} out of range for K = {self.K}")
        u = self.noise.draw_noise(as_generator(rng), None)
        return float(self.noise.rewards(self.instance.mean_reward(action), u))


def sample_reward(env: Environment, action: int, rng) -> float:
    return env.sample_reward(action, rng)


def make_noise(family: str, sigma: float = 1.0) -> NoiseModel:
    kinds = {
        "gaussian": GaussianNoise,
        "rademacher": RademacherNoise,
        "linear": LinearGaussianNoise,
    }
    if family == "bernoulli":
        return BernoulliReward()
    if family not in kinds:
        raise ValueError(f"unknown noise kind {family!r}")
    return kinds[family](sigma)


def make_linear_action_set(K: int, d: int, rng) -> FeaturizedActions:
    """Canonical basis followed by K - d random unit vectors in the positive orthant.

    Random directions are uniform on the unit cube, then normalized.
    """
    if d < 1 or K < d:
        raise ValueError(f"need K >= d >= 1, got K = {K}, d = {d}")
    gen = as_generator(rng)
    extra = gen.random((K - d, d))
    norms = np.linalg.norm(extra, axis=1, keepdims=True)
    # a zero draw has probability zero but would break normalization
    if np.any(norms == 0):
        raise FloatingPointError("degenerate zero action drawn")
    vectors = np.vstack([np.eye(d), extra / norms])
    return FeaturizedActions(vectors, L=1.0)

