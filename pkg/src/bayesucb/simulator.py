"""Monte Carlo engine for Bayes regret.

Run ``r`` of an experiment draws its instance from stream ``(seed, r, INSTANCE)``
and its reward variates from ``(seed, r, REWARDS)``; every policy in the
experiment sees the same instance and the same per-round variates, so policy
comparisons are paired. Runs are simulated in fixed-size chunks, vectorized
across the chunk, and reduced strictly in run order, which makes results
independent of the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import bounds as B
from .config import ExperimentConfig
from .core import (
    INSTANCE,
    REWARDS,
    FeaturizedActions,
    RngStream,
    gaps_from_means,
    sample_thetas,
)
from .environments import Environment
from .policies import (
    BAYESUCB_GAUSSIAN,
    LinearPosterior,
    PolicyConfig,
    init_state,
)

CHUNK_SIZE = 250
# stream id for Monte Carlo bound curves; run indices use 0, 1, 2, ...
CURVE_BOUND_STREAM = (1 << 64) - 2


class RunningMoments:
    """Streaming per-coordinate mean and variance (Welford, batched via Chan's merge)."""

    def __init__(self, shape=()):
        self.count = 0
        self.mean = np.zeros(shape)
        self.m2 = np.zeros(shape)

    def push(self, x) -> None:
        self.push_batch(np.asarray(x, dtype=float)[None])

    def push_batch(self, xs: np.ndarray) -> None:
        nb = xs.shape[0]
        if nb == 0:
            return
        mb = xs.mean(axis=0)
        m2b = ((xs - mb) ** 2).sum(axis=0)
        n = self.count + nb
        d = mb - self.mean
        self.mean = self.mean + d * (nb / n)
        self.m2 = self.m2 + m2b + d * d * (self.count * nb / n)
        self.count = n

    @property
    def variance(self) -> np.ndarray:
        if self.count < 2:
            return np.zeros_like(self.mean)
        return self.m2 / (self.count - 1)

    @property
    def std_error(self) -> np.ndarray:
        if self.count < 2:
            return np.zeros_like(self.mean)
        return np.sqrt(self.variance / self.count)


@dataclass
class RunDiagnostics:
    cum_regret: np.ndarray
    pulls: np.ndarray
    all_confidence_held: bool
    variance_ledger: float
    confidence_failed: np.ndarray | None = None  # per-round flags when diagnostics are on


@dataclass
class ExperimentResult:
    policy: str
    mean_cum_regret: np.ndarray
    std_error: np.ndarray
    num_runs: int
    config_echo: ExperimentConfig | None
    final_regret: np.ndarray
    # diagnostics; zeros when diagnostics were off
    confidence_failures: np.ndarray | None = None  # runs whose E_t failed, per round
    runs_all_held: int = 0
    count_bound_checked: int = 0
    count_bound_violations: int = 0
    count_bound_worst_excess: float = -math.inf
    # same limit applied to an arm's count just before each pull made while E_t held
    prepull_violations: int = 0
    prepull_worst_excess: float = -math.inf
    ledger_violations: int = 0
    ledger_max_ratio: float = 0.0

    @property
    def final_mean(self) -> float:
        return float(self.mean_cum_regret[-1])

    @property
    def final_se(self) -> float:
        return float(self.std_error[-1])


@dataclass
class _ChunkOut:
    cum_regret: np.ndarray
    pulls: np.ndarray
    held: np.ndarray
    ledger: np.ndarray
    failed: np.ndarray | None
    prepull_excess: np.ndarray | None = None
    means: np.ndarray | None = None


def count_limits(config: PolicyConfig, means: np.ndarray) -> np.ndarray:
    """8 sigma^2 log(1/delta) / gap^2 - sigma^2 / sigma0^2 per arm (+inf for zero gaps)."""
    gaps = gaps_from_means(means)
    with np.errstate(divide="ignore"):
        return (8 * config.sigma**2 * config.log_inv_delta / gaps**2
                - config.sigma**2 / config.prior.sigma0**2)


def _play(config: PolicyConfig, action_set, means: np.ndarray, noise_model, variates: np.ndarray,
          diagnostics: bool) -> _ChunkOut:
    """Run one policy on a batch of instances; ``variates`` has shape (B, n).

    With diagnostics on, records per-round failures of E_t and, for Gaussian
    BayesUCB, the largest excess of a pulled arm's pre-pull count over its
    count limit among rounds where E_t held.
    """
    batch, n = variates.shape
    state = init_state(config, batch, action_set if isinstance(action_set, FeaturizedActions) else None)
    rows = np.arange(batch)
    best = means.max(axis=1)
    inst_regret = np.empty((batch, n))
    pulls = np.zeros(means.shape, dtype=np.int64)
    ledger = np.zeros(batch)
    linear = isinstance(state, LinearPosterior)
    failed = np.zeros((batch, n), dtype=bool) if diagnostics else None
    limits = count_limits(config, means) if diagnostics and config.kind == BAYESUCB_GAUSSIAN else None
    prepull = np.full(batch, -np.inf) if limits is not None else None
    for t in range(n):
        if diagnostics:
            failed[:, t] = ~state.confidence_held(means)
        actions = state.select(t)
        if limits is not None:
            excess = state.n_pulls[rows, actions] - limits[rows, actions]
            np.maximum(prepull, np.where(failed[:, t], -np.inf, excess), out=prepull)
        if linear:
            ledger += state.chosen_variance(actions)
        chosen = means[rows, actions]
        inst_regret[:, t] = best - chosen
        pulls[rows, actions] += 1
        state.update(actions, noise_model.rewards(chosen, variates[:, t]))
    held = ~failed.any(axis=1) if diagnostics else np.ones(batch, dtype=bool)
    return _ChunkOut(np.cumsum(inst_regret, axis=1), pulls, held, ledger, failed, prepull)


def run_episode(env: Environment, policy_config: PolicyConfig, n: int, rng,
                diagnostics_on: bool = False) -> RunDiagnostics:
    """Play ``n`` rounds of one policy on ``env``'s instance.

    ``rng`` is the stream for the reward variates; passing
    ``RngStream(seed, r, REWARDS)`` replays run ``r`` of an experiment.
    """
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    variates = env.noise.draw_noise(gen, (1, n))
    means = env.instance.mean_rewards()[None, :]
    out = _play(policy_config, env.instance.action_set, means, env.noise, variates, diagnostics_on)
    return RunDiagnostics(
        cum_regret=out.cum_regret[0],
        pulls=out.pulls[0],
        all_confidence_held=bool(out.held[0]) if diagnostics_on else True,
        variance_ledger=float(out.ledger[0]),
        confidence_failed=None if out.failed is None else out.failed[0],
    )


# ------------------------------------------------------------------ experiments


@dataclass
class _Setup:
    config: ExperimentConfig
    prior: object
    action_set: object
    noise: object
    policies: dict[str, PolicyConfig]
    diagnostics: bool


def _simulate_chunk(setup: _Setup, start: int, stop: int) -> dict[str, _ChunkOut]:
    cfg = setup.config
    thetas, variates = [], []
    for r in range(start, stop):
        stream = RngStream(cfg.seed, r)
        thetas.append(sample_thetas(setup.prior, stream.fork(INSTANCE)))
        variates.append(setup.noise.draw_noise(stream.fork(REWARDS).generator(), cfg.horizon))
    thetas = np.array(thetas)
    variates = np.array(variates)
    if isinstance(setup.action_set, FeaturizedActions):
        means = thetas @ setup.action_set.vectors.T
    else:
        means = thetas
    outs = {}
    for name, pc in setup.policies.items():
        outs[name] = _play(pc, setup.action_set, means, setup.noise, variates, setup.diagnostics)
        outs[name].means = means
    return outs


def _chunks(runs: int):
    return [(s, min(s + CHUNK_SIZE, runs)) for s in range(0, runs, CHUNK_SIZE)]


class _Accumulator:
    def __init__(self, name: str, pc: PolicyConfig, setup: _Setup):
        n = setup.config.horizon
        self.name = name
        self.pc = pc
        self.setup = setup
        self.moments = RunningMoments(n)
        self.final = []
        self.failures = np.zeros(n, dtype=np.int64)
        self.all_held = 0
        self.checked = 0
        self.violations = 0
        self.worst_excess = -math.inf
        self.prepull_violations = 0
        self.prepull_worst_excess = -math.inf
        self.ledger_violations = 0
        self.ledger_max_ratio = 0.0
        if isinstance(setup.action_set, FeaturizedActions):
            s0 = B.sigma0_max(setup.prior, setup.action_set)
            self.budget = B.lemma8_variance_budget(pc.sigma, s0, setup.prior.d, n)
        else:
            self.budget = None

    def add(self, out: _ChunkOut) -> None:
        self.moments.push_batch(out.cum_regret)
        self.final.append(out.cum_regret[:, -1])
        if not self.setup.diagnostics:
            return
        self.failures += out.failed.sum(axis=0)
        self.all_held += int(out.held.sum())
        if self.pc.kind == BAYESUCB_GAUSSIAN:
            self._count_bound(out)
        if self.budget is not None:
            ratio = out.ledger / self.budget if self.budget > 0 else np.where(out.ledger > 0, np.inf, 0.0)
            self.ledger_violations += int(np.sum(out.ledger > self.budget))
            self.ledger_max_ratio = max(self.ledger_max_ratio, float(ratio.max()))

    def _count_bound(self, out: _ChunkOut) -> None:
        # final pull counts against the count limit, on runs where every E_t held
        limit = count_limits(self.pc, out.means)
        sub = gaps_from_means(out.means) > 0
        excess = np.where(sub, out.pulls - limit, -np.inf)
        held = out.held
        self.checked += int(held.sum())
        if held.any():
            worst = excess[held].max(axis=1)
            self.violations += int(np.sum(worst > 0))
            self.worst_excess = max(self.worst_excess, float(worst.max()))
        self.prepull_violations += int(np.sum(out.prepull_excess > 0))
        self.prepull_worst_excess = max(self.prepull_worst_excess, float(out.prepull_excess.max()))

    def result(self) -> ExperimentResult:
        diag = self.setup.diagnostics
        return ExperimentResult(
            policy=self.name,
            mean_cum_regret=self.moments.mean,
            std_error=self.moments.std_error,
            num_runs=self.moments.count,
            config_echo=self.setup.config,
            final_regret=np.concatenate(self.final),
            confidence_failures=self.failures if diag else None,
            runs_all_held=self.all_held,
            count_bound_checked=self.checked,
            count_bound_violations=self.violations,
            count_bound_worst_excess=self.worst_excess,
            prepull_violations=self.prepull_violations,
            prepull_worst_excess=self.prepull_worst_excess,
            ledger_violations=self.ledger_violations,
            ledger_max_ratio=self.ledger_max_ratio,
        )


def bayes_regret(config: ExperimentConfig, diagnostics: bool = False,
                 threads: int | None = None) -> dict[str, ExperimentResult]:
    """Estimate the Bayes regret curve of every configured policy."""
    threads = config.threads if threads is None else threads
    setup = _Setup(config, config.prior(), config.action_set(), config.noise_model(),
                   config.policy_configs(), diagnostics)
    accs = {name: _Accumulator(name, pc, setup) for name, pc in setup.policies.items()}
    chunks = _chunks(config.runs)
    window = max(1, threads) * 2
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for i in range(0, len(chunks), window):
            futures = [pool.submit(_simulate_chunk, setup, s, e) for s, e in chunks[i:i + window]]
            for fut in futures:  # reduce in run order
                for name, out in fut.result().items():
                    accs[name].add(out)
    return {name: acc.result() for name, acc in accs.items()}


def paired_difference(a: ExperimentResult, b: ExperimentResult) -> tuple[float, float]:
    """Mean and standard error of a.final - b.final over paired runs."""
    d = a.final_regret - b.final_regret
    if d.size < 2:
        return float(d.mean()), 0.0
    return float(d.mean()), float(d.std(ddof=1) / math.sqrt(d.size))


# ------------------------------------------------------------------- sweeps


@dataclass
class SweepPoint:
    value: float
    results: dict[str, ExperimentResult]
    bounds: dict[str, B.BoundEstimate] = field(default_factory=dict)


def curve_bounds(config: ExperimentConfig, bound_seed: int | None = None) -> dict[str, B.BoundEstimate]:
    """Bound curves plotted alongside empirical regret for one configuration."""
    n = config.horizon
    delta, eps = config.delta_value, config.epsilon_value
    rng = RngStream(config.seed if bound_seed is None else bound_seed, CURVE_BOUND_STREAM)
    prior = config.prior()
    if config.family == "gaussian":
        return {
            "thm1": B.thm1_leading_term(prior, config.sigma, delta, eps, n, config.mc_samples, rng),
            "ucb1_leading": B.ucb1_gap_leading_term(prior, config.sigma, delta, eps, config.mc_samples, rng),
            "sqrt_karmed": B.sqrt_bound_karmed(config.sigma, config.sigma0, config.K, n),
        }
    if config.family == "linear":
        actions = config.action_set()
        return {
            "thm6": B.thm6_linear_bound(prior, actions, config.sigma, delta, eps, n, config.mc_samples, rng),
            "sqrt_linear": B.sqrt_bound_linear(config.sigma, B.sigma0_max(prior, actions), config.d, n, delta),
        }
    return {"thm5_gap": B.thm5_gap_bound(prior, delta, eps, n, config.mc_samples, rng)}


def sweep(base_config: ExperimentConfig, parameter: str, grid, with_bounds: bool = True,
          diagnostics: bool = False) -> list[SweepPoint]:
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid is empty")
    points = []
    for value in grid:
        cfg = base_config.with_parameter(parameter, value)
        results = bayes_regret(cfg, diagnostics=diagnostics)
        points.append(SweepPoint(float(value), results, curve_bounds(cfg) if with_bounds else {}))
    return points


# ------------------------------------------------------------------ bakeoff

BAKEOFF_K = (5, 10, 20)
BAKEOFF_SIGMA = (0.5, 1.0, 2.0)
BAKEOFF_GAP = (0.5, 1.0, 2.0)
BAKEOFF_SIGMA0 = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class BakeoffRow:
    K: int
    sigma: float
    prior_gap: float
    sigma0: float
    difference: float  # UCB1 regret minus BayesUCB regret
    std_error: float


def bakeoff_grid(noise: str, runs: int, horizon: int = 1000, seed: int = 0,
                 threads: int = 1) -> list[BakeoffRow]:
    if runs < 1:
        raise ValueError("runs must be >= 1")
    rows = []
    for K, sigma, gap, sigma0 in product(BAKEOFF_K, BAKEOFF_SIGMA, BAKEOFF_GAP, BAKEOFF_SIGMA0):
        cfg = ExperimentConfig(family="gaussian", noise=noise, K=K, sigma=sigma, prior_gap=gap,
                               sigma0=sigma0, horizon=horizon, runs=runs, seed=seed,
                               threads=threads, policies=("bayesucb", "ucb1"))
        res = bayes_regret(cfg)
        diff, se = paired_difference(res["ucb1"], res["bayesucb"])
        rows.append(BakeoffRow(K, sigma, gap, sigma0, diff, se))
    rows.sort(key=lambda r: r.difference)
    return rows
