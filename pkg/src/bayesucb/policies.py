"""BayesUCB (Gaussian, Bernoulli, linear) and UCB1.

Policy states are batched: every array carries a leading axis over ``B``
independent runs, so one state object advances many runs in lock-step. A
single run is simply ``B = 1``. No state ever sees the true parameter except
through :meth:`confidence_held`, which the simulator only calls when
diagnostics are requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BanditInstance,
    BetaPrior,
    FeaturizedActions,
    GaussianPrior,
    LinearGaussianPrior,
    Prior,
)

BAYESUCB_GAUSSIAN = "bayesucb_gaussian"
BAYESUCB_BERNOULLI = "bayesucb_bernoulli"
BAYESUCB_LINEAR = "bayesucb_linear"
UCB1 = "ucb1"
KINDS = (BAYESUCB_GAUSSIAN, BAYESUCB_BERNOULLI, BAYESUCB_LINEAR, UCB1)


@dataclass(frozen=True)
class PolicyConfig:
    kind: str
    delta: float
    sigma: float = 1.0
    prior: Prior | None = None
    K: int | None = None  # UCB1 has no prior to read K from

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.kind != BAYESUCB_BERNOULLI and not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        expected = {
            BAYESUCB_GAUSSIAN: GaussianPrior,
            BAYESUCB_BERNOULLI: BetaPrior,
            BAYESUCB_LINEAR: LinearGaussianPrior,
        }
        if self.kind == UCB1:
            if self.K is None or self.K < 1:
                raise ValueError("UCB1 needs the number of arms K")
        elif not isinstance(self.prior, expected[self.kind]):
            raise TypeError(f"{self.kind} needs a {expected[self.kind].__name__}")

    @classmethod
    def bayes_ucb(cls, prior: Prior, delta: float, sigma: float = 1.0) -> "PolicyConfig":
        kind = {
            GaussianPrior: BAYESUCB_GAUSSIAN,
            BetaPrior: BAYESUCB_BERNOULLI,
            LinearGaussianPrior: BAYESUCB_LINEAR,
        }[type(prior)]
        return cls(kind, delta, sigma, prior)

    @classmethod
    def ucb1(cls, K: int, delta: float, sigma: float = 1.0) -> "PolicyConfig":
        return cls(UCB1, delta, sigma, None, K)

    @property
    def log_inv_delta(self) -> float:
        return math.log(1.0 / self.delta)


class GaussianArms:
    """Per-arm Gaussian posteriors; with ``sigma0 = inf`` and forced
    initialization this is exactly UCB1."""

    def __init__(self, mu0, sigma0: float, sigma: float, delta: float, batch: int = 1,
                 forced_init: bool = False):
        self.mu0 = np.asarray(mu0, dtype=float)
        self.K = self.mu0.shape[0]
        self.sigma0 = float(sigma0)
        self.sigma = float(sigma)
        self.delta = float(delta)
        self.forced_init = forced_init
        self._prior_prec = 0.0 if math.isinf(self.sigma0) else self.sigma0 ** -2
        self._noise_prec = self.sigma ** -2
        self._scale = math.sqrt(2.0 * math.log(1.0 / self.delta))
        self.n_pulls = np.zeros((batch, self.K), dtype=np.int64)
        self.sum_rewards = np.zeros((batch, self.K))

    @property
    def post_var(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / (self._prior_prec + self._noise_prec * self.n_pulls)

    @property
    def post_mean(self) -> np.ndarray:
        v = self.post_var
        prior_part = self._prior_prec * self.mu0
        with np.errstate(invalid="ignore"):
            mean = v * (prior_part + self._noise_prec * self.sum_rewards)
        return np.where(np.isfinite(v), mean, self.mu0)

    def widths(self) -> np.ndarray:
        return self._scale * np.sqrt(self.post_var)

    def indices(self) -> np.ndarray:
        return self.post_mean + self.widths()

    def select(self, t: int) -> np.ndarray:
        """Actions for round ``t`` (0-based) for every run in the batch."""
        if self.forced_init and t < self.K:
            return np.full(self.n_pulls.shape[0], t, dtype=np.int64)
        return np.argmax(self.indices(), axis=1)

    def update(self, actions: np.ndarray, rewards: np.ndarray) -> None:
        rows = np.arange(self.n_pulls.shape[0])
        self.n_pulls[rows, actions] += 1
        self.sum_rewards[rows, actions] += rewards

    def arm_means(self) -> np.ndarray:
        return self.post_mean

    def confidence_held(self, means: np.ndarray) -> np.ndarray:
        """E_t for each run: every arm's true mean lies inside its interval."""
        err = np.abs(means - self.post_mean)
        return np.all(err <= self.widths(), axis=1)

    def chosen_variance(self, actions: np.ndarray) -> np.ndarray:
        return self.post_var[np.arange(actions.shape[0]), actions]


class BetaArms:
    """Per-arm Beta posteriors for Bernoulli rewards."""

    forced_init = False

    def __init__(self, alpha, beta, delta: float, batch: int = 1):
        self.alpha0 = np.asarray(alpha, dtype=float)
        self.beta0 = np.asarray(beta, dtype=float)
        self.K = self.alpha0.shape[0]
        self.delta = float(delta)
        self._log_inv_delta = math.log(1.0 / self.delta)
        self.alpha = np.tile(self.alpha0, (batch, 1))
        self.beta = np.tile(self.beta0, (batch, 1))

    @property
    def n_pulls(self) -> np.ndarray:
        return np.rint(self.alpha + self.beta - self.alpha0 - self.beta0).astype(np.int64)

    @property
    def post_mean(self) -> np.ndarray:
        return self.alpha / (self.alpha + self.beta)

    @property
    def post_var(self) -> np.ndarray:
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1.0))

    def widths(self) -> np.ndarray:
        # sub-Gaussian variance proxy of Beta(alpha, beta) is 1 / (4 (alpha + beta + 1))
        return np.sqrt(self._log_inv_delta / (2.0 * (self.alpha + self.beta + 1.0)))

    def indices(self) -> np.ndarray:
        return self.post_mean + self.widths()

    def select(self, t: int) -> np.ndarray:
        return np.argmax(self.indices(), axis=1)

    def update(self, actions: np.ndarray, rewards: np.ndarray) -> None:
        rewards = np.asarray(rewards, dtype=float)
        if np.any((rewards != 0.0) & (rewards != 1.0)):
            raise ValueError("Bernoulli rewards must be 0 or 1")
        rows = np.arange(self.alpha.shape[0])
        self.alpha[rows, actions] += rewards
        self.beta[rows, actions] += 1.0 - rewards

    def arm_means(self) -> np.ndarray:
        return self.post_mean

    def confidence_held(self, means: np.ndarray) -> np.ndarray:
        return np.all(np.abs(means - self.post_mean) <= self.widths(), axis=1)

    def chosen_variance(self, actions: np.ndarray) -> np.ndarray:
        return self.post_var[np.arange(actions.shape[0]), actions]


class LinearPosterior:
    """Gaussian posterior over a linear model parameter, kept in precision form.

    The covariance and mean are recomputed from the precision by a linear
    solve after every update.
    """

    forced_init = False

    def __init__(self, theta0, cov0, actions: np.ndarray, sigma: float, delta: float,
                 batch: int = 1):
        theta0 = np.asarray(theta0, dtype=float)
        cov0 = np.asarray(cov0, dtype=float)
        self.actions = np.asarray(actions, dtype=float)
        self.K, self.d = self.actions.shape
        self.sigma = float(sigma)
        self.delta = float(delta)
        self._noise_prec = self.sigma ** -2
        self._scale = math.sqrt(2.0 * math.log(1.0 / self.delta))
        if np.linalg.matrix_rank(cov0) < self.d:
            raise np.linalg.LinAlgError("linear BayesUCB needs a nonsingular prior covariance")
        prec0 = np.linalg.inv(cov0)
        prec0 = 0.5 * (prec0 + prec0.T)
        self.precision = np.tile(prec0, (batch, 1, 1))
        self.weighted_sum = np.tile(prec0 @ theta0, (batch, 1))
        self.n_pulls = np.zeros((batch, self.K), dtype=np.int64)
        self._refresh()

    def _refresh(self) -> None:
        B = self.precision.shape[0]
        rhs = np.concatenate(
            [np.broadcast_to(np.eye(self.d), (B, self.d, self.d)), self.weighted_sum[:, :, None]],
            axis=2,
        )
        sol = np.linalg.solve(self.precision, rhs)
        cov = sol[:, :, : self.d]
        self.post_cov = 0.5 * (cov + cov.transpose(0, 2, 1))
        self.post_mean = sol[:, :, self.d]
        # ||a||^2 under the posterior covariance for every action, shape (B, K)
        self._action_var = (np.matmul(self.actions, self.post_cov) * self.actions).sum(axis=2)

    def action_variances(self) -> np.ndarray:
        """||a||^2 under the posterior covariance, shape (B, K)."""
        return self._action_var

    def widths(self) -> np.ndarray:
        return self._scale * np.sqrt(np.clip(self.action_variances(), 0.0, None))

    def arm_means(self) -> np.ndarray:
        return self.post_mean @ self.actions.T

    def indices(self) -> np.ndarray:
        return self.arm_means() + self.widths()

    def select(self, t: int) -> np.ndarray:
        return np.argmax(self.indices(), axis=1)

    def update(self, actions: np.ndarray, rewards: np.ndarray) -> None:
        x = self.actions[actions]
        self.precision += self._noise_prec * x[:, :, None] * x[:, None, :]
        self.weighted_sum += self._noise_prec * x * np.asarray(rewards, dtype=float)[:, None]
        self.n_pulls[np.arange(x.shape[0]), actions] += 1
        self._refresh()

    def confidence_held(self, means: np.ndarray) -> np.ndarray:
        return np.all(np.abs(means - self.arm_means()) <= self.widths(), axis=1)

    def chosen_variance(self, actions: np.ndarray) -> np.ndarray:
        x = self.actions[actions]
        return np.einsum("bd,bde,be->b", x, self.post_cov, x)


PolicyState = GaussianArms | BetaArms | LinearPosterior


def init_state(config: PolicyConfig, batch: int = 1,
               action_set: FeaturizedActions | None = None) -> PolicyState:
    prior = config.prior
    if config.kind == BAYESUCB_GAUSSIAN:
        return GaussianArms(prior.mu0, prior.sigma0, config.sigma, config.delta, batch)
    if config.kind == UCB1:
        return GaussianArms(np.zeros(config.K), math.inf, config.sigma, config.delta, batch,
                            forced_init=True)
    if config.kind == BAYESUCB_BERNOULLI:
        return BetaArms(prior.alpha, prior.beta, config.delta, batch)
    if action_set is None:
        raise ValueError("linear BayesUCB needs the featurized action set")
    return LinearPosterior(prior.theta0, prior.cov0, action_set.vectors, config.sigma,
                           config.delta, batch)


# single-run conveniences over batch row 0


def ucb_index(state: PolicyState, action: int) -> float:
    if isinstance(state, GaussianArms) and state.forced_init and state.n_pulls[0, action] == 0:
        raise ValueError(f"UCB1 index of arm {action} is undefined before its first pull")
    return float(state.indices()[0, action])


def select_action(state: PolicyState, t: int) -> int:
    return int(state.select(t)[0])


def update(state: PolicyState, action: int, reward: float) -> PolicyState:
    state.update(np.array([action]), np.array([reward], dtype=float))
    return state


def confidence_event_holds(state: PolicyState, instance: BanditInstance) -> bool:
    return bool(state.confidence_held(instance.mean_rewards()[None, :])[0])
