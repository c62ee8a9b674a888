"""Domain types, gap arithmetic, instance sampling and the RNG contract."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

# sub-stream purposes within a run's stream
INSTANCE, REWARDS, TIES = 0, 1, 2

_U64 = (1 << 64) - 1


def _frozen(x, dtype=float) -> np.ndarray:
    arr = np.array(x, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RngStream:
    """Key of a counter-based random stream.

    The (master_seed, stream_id) pair is the 128-bit Philox key and
    ``substream`` selects a disjoint region of the counter space, so streams
    never overlap and can be created in any order.
    """

    master_seed: int
    stream_id: int
    substream: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id", "substream"):
            v = getattr(self, name)
            if not 0 <= v <= _U64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v}")

    def fork(self, substream: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_id, substream)

    def generator(self) -> np.random.Generator:
        key = (self.master_seed << 64) | self.stream_id
        return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, self.substream]))


def as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


# ---------------------------------------------------------------- priors


@dataclass(frozen=True)
class GaussianPrior:
    """Independent N(mu0[a], sigma0^2) prior over K arm means."""

    mu0: np.ndarray
    sigma0: float

    def __post_init__(self):
        object.__setattr__(self, "mu0", _frozen(np.atleast_1d(self.mu0)))
        if not (self.sigma0 > 0 and math.isfinite(self.sigma0)):
            raise ValueError(f"sigma0 must be positive and finite, got {self.sigma0}")
        if self.mu0.ndim != 1 or not np.all(np.isfinite(self.mu0)):
            raise ValueError("mu0 must be a finite vector")

    @property
    def K(self) -> int:
        return self.mu0.shape[0]


@dataclass(frozen=True)
class BetaPrior:
    """Independent Beta(alpha[a], beta[a]) prior over K Bernoulli means."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha, beta = np.broadcast_arrays(np.atleast_1d(self.alpha), np.atleast_1d(self.beta))
        object.__setattr__(self, "alpha", _frozen(alpha))
        object.__setattr__(self, "beta", _frozen(beta))
        if self.alpha.ndim != 1:
            raise ValueError("alpha and beta must be vectors")
        if not (np.all(self.alpha > 0) and np.all(self.beta > 0)):
            raise ValueError("Beta pseudo-counts must be positive")
        if not (np.all(np.isfinite(self.alpha)) and np.all(np.isfinite(self.beta))):
            raise ValueError("Beta pseudo-counts must be finite")

    @property
    def K(self) -> int:
        return self.alpha.shape[0]


@dataclass(frozen=True)
class LinearGaussianPrior:
    """N(theta0, cov0) prior over the d-dimensional linear model parameter."""

    theta0: np.ndarray
    cov0: np.ndarray

    def __post_init__(self):
        theta0 = np.atleast_1d(np.asarray(self.theta0, dtype=float))
        cov0 = np.atleast_2d(np.asarray(self.cov0, dtype=float))
        if cov0.shape != (theta0.shape[0],) * 2:
            raise ValueError(f"cov0 shape {cov0.shape} does not match theta0 of length {theta0.shape[0]}")
        cov0 = 0.5 * (cov0 + cov0.T)
        w = np.linalg.eigvalsh(cov0)
        if w[0] < -1e-12 * max(1.0, abs(w[-1])):
            raise ValueError(f"cov0 is not positive semi-definite (min eigenvalue {w[0]:.3g})")
        object.__setattr__(self, "theta0", _frozen(theta0))
        object.__setattr__(self, "cov0", _frozen(cov0))

    @property
    def d(self) -> int:
        return self.theta0.shape[0]

    @property
    def max_eigenvalue(self) -> float:
        return float(max(np.linalg.eigvalsh(self.cov0)[-1], 0.0))

    def sqrt_cov(self) -> np.ndarray:
        """Matrix square root S with S S^T = cov0 (Cholesky, eigen fallback)."""
        try:
            return np.linalg.cholesky(self.cov0)
        except np.linalg.LinAlgError:
            w, v = np.linalg.eigh(self.cov0)
            return v * np.sqrt(np.clip(w, 0.0, None))


Prior = Union[GaussianPrior, BetaPrior, LinearGaussianPrior]


# ----------------------------------------------------------- action sets


@dataclass(frozen=True)
class IndexedActions:
    K: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")

    @property
    def size(self) -> int:
        return self.K


@dataclass(frozen=True)
class FeaturizedActions:
    """K action vectors in R^d, each with l2 norm at most ``L``."""

    vectors: np.ndarray
    L: float | None = None

    def __post_init__(self):
        vectors = _frozen(np.atleast_2d(self.vectors))
        if vectors.shape[0] < 1 or not np.all(np.isfinite(vectors)):
            raise ValueError("need at least one finite action vector")
        norms = np.linalg.norm(vectors, axis=1)
        L = float(norms.max()) if self.L is None else float(self.L)
        if np.any(norms > L * (1 + 1e-12)):
            raise ValueError(f"action norm {norms.max()} exceeds declared L = {L}")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "L", L)

    @property
    def K(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    @property
    def size(self) -> int:
        return self.K


ActionSet = Union[IndexedActions, FeaturizedActions]


# ------------------------------------------------------------- instances


@dataclass(frozen=True)
class GapProfile:
    gaps: np.ndarray
    min_gap: float
    optimal_index: int


@dataclass(frozen=True)
class BanditInstance:
    theta: np.ndarray
    action_set: ActionSet
    _means: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        theta = _frozen(np.atleast_1d(self.theta))
        object.__setattr__(self, "theta", theta)
        if isinstance(self.action_set, FeaturizedActions):
            if theta.shape != (self.action_set.d,):
                raise ValueError("theta dimension does not match the action vectors")
            means = self.action_set.vectors @ theta
        else:
            if theta.shape != (self.action_set.K,):
                raise ValueError("theta must have one entry per arm")
            means = theta
        if not np.all(np.isfinite(means)):
            raise ValueError("mean rewards must be finite")
        object.__setattr__(self, "_means", _frozen(means))

    @property
    def K(self) -> int:
        return self.action_set.size

    def mean_rewards(self) -> np.ndarray:
        return self._means

    def mean_reward(self, a: int) -> float:
        return float(self._means[a])

    @property
    def optimal_action(self) -> int:
        return int(np.argmax(self._means))


def clip_gap(delta: float, epsilon: float) -> float:
    """Return max(delta, epsilon)."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not delta >= 0:
        raise ValueError(f"gap must be nonnegative, got {delta}")
    return max(delta, epsilon)


def gaps_from_means(means: np.ndarray) -> np.ndarray:
    """Gaps along the last axis; works on (K,) and batched (..., K) arrays."""
    return np.max(means, axis=-1, keepdims=True) - means


def gap_profile(instance: BanditInstance) -> GapProfile:
    means = instance.mean_rewards()
    best = int(np.argmax(means))
    gaps = _frozen(means[best] - means)
    others = np.delete(gaps, best)
    min_gap = float(others.min()) if others.size else math.inf
    return GapProfile(gaps=gaps, min_gap=min_gap, optimal_index=best)


def _check_pairing(prior: Prior, action_set: ActionSet) -> None:
    if isinstance(prior, LinearGaussianPrior):
        if not isinstance(action_set, FeaturizedActions):
            raise TypeError("a linear prior needs a featurized action set")
        if action_set.d != prior.d:
            raise ValueError(f"action dimension {action_set.d} != prior dimension {prior.d}")
    elif isinstance(prior, (GaussianPrior, BetaPrior)):
        if not isinstance(action_set, IndexedActions):
            raise TypeError("per-arm priors need an indexed action set")
        if action_set.K != prior.K:
            raise ValueError(f"prior has {prior.K} arms but action set has {action_set.K}")
    else:
        raise TypeError(f"unknown prior type {type(prior).__name__}")


def sample_thetas(prior: Prior, rng, size: int | None = None) -> np.ndarray:
    """Draw model parameters from ``prior``; shape ``(size, dim)`` or ``(dim,)``."""
    gen = as_generator(rng)
    shape = (1 if size is None else size,)
    if isinstance(prior, GaussianPrior):
        out = prior.mu0 + prior.sigma0 * gen.standard_normal(shape + (prior.K,))
    elif isinstance(prior, BetaPrior):
        out = gen.beta(prior.alpha, prior.beta, size=shape + (prior.K,))
    elif isinstance(prior, LinearGaussianPrior):
        z = gen.standard_normal(shape + (prior.d,))
        out = prior.theta0 + z @ prior.sqrt_cov().T
    else:
        raise TypeError(f"unknown prior type {type(prior).__name__}")
    return out[0] if size is None else out


def sample_instance(prior: Prior, action_set: ActionSet, rng) -> BanditInstance:
    _check_pairing(prior, action_set)
    return BanditInstance(sample_thetas(prior, rng), action_set)
