"""Regret-bound evaluation.

Closed forms are evaluated directly (``std_error == 0``). Prior expectations
are Monte Carlo averages over draws from the prior and report the standard
error of the mean. Every estimate's ``value`` is the sum of its
``components``; ``extras`` carries auxiliary quantities that are not summed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import (
    BetaPrior,
    FeaturizedActions,
    GaussianPrior,
    LinearGaussianPrior,
    as_generator,
    gaps_from_means,
    sample_thetas,
)

DEFAULT_MC_SAMPLES = 100_000
ASYMPTOTIC = "asymptotic"
RANGE_SUP = "range_sup"


class BoundPreconditionError(ValueError):
    """A bound was evaluated outside the parameter range where it holds."""


class UseAppendixC(BoundPreconditionError):
    """The prior is too narrow for the prior-dependent bound; use the small-sigma0 bound."""


@dataclass(frozen=True)
class BoundEstimate:
    value: float
    std_error: float = 0.0
    num_samples: int = 0
    components: dict[str, float] = field(default_factory=dict)
    extras: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ComplexityTermSpec:
    xi_mode: str = ASYMPTOTIC
    num_mc_samples: int = DEFAULT_MC_SAMPLES

    def __post_init__(self):
        if self.xi_mode not in (ASYMPTOTIC, RANGE_SUP):
            raise ValueError(f"unknown xi mode {self.xi_mode!r}")
        if self.num_mc_samples < 1:
            raise ValueError("num_mc_samples must be at least 1")


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def _log_inv(delta: float) -> float:
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.log(1.0 / delta)


def _check_n(n) -> None:
    if not n > math.e:
        raise ValueError(f"horizon n must exceed e so that log log n is defined, got {n}")


def sigma0_threshold(delta: float, n) -> float:
    """Smallest sigma0^2 for which the prior-dependent BayesUCB bound applies."""
    _check_n(n)
    return 1.0 / (8.0 * _log_inv(delta) * n * n * math.log(math.log(n)))


def _suboptimal_mask(gaps: np.ndarray) -> np.ndarray:
    best = np.argmax(-gaps, axis=1)  # gap 0 at the argmax; lowest index on ties
    mask = np.ones(gaps.shape, dtype=bool)
    mask[np.arange(gaps.shape[0]), best] = False
    return mask


def _gap_leading(gaps: np.ndarray, epsilon: float, coef: float, penalty) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample sums over suboptimal arms of coef / gap - penalty * gap (clipped gaps).

    Returns (clamped, unclamped); the clamped version takes max(0, .) per arm.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    clipped = np.maximum(gaps, epsilon)
    terms = coef / clipped - penalty * clipped
    mask = _suboptimal_mask(gaps)
    return (np.where(mask, np.maximum(terms, 0.0), 0.0).sum(axis=1),
            np.where(mask, terms, 0.0).sum(axis=1))


def _karmed_gaps(prior, num_samples: int, rng) -> np.ndarray:
    return gaps_from_means(sample_thetas(prior, rng, num_samples))


# ------------------------------------------------------ gap-dependent bounds


def thm1_leading_term(prior: GaussianPrior, sigma: float, delta: float, epsilon: float, n: int,
                      num_samples: int = DEFAULT_MC_SAMPLES, rng=0) -> BoundEstimate:
    """Gap-dependent Bayes regret bound of Gaussian BayesUCB (leading term plus C)."""
    if not isinstance(prior, GaussianPrior):
        raise TypeError("the gap-dependent Gaussian bound needs a GaussianPrior")
    L = _log_inv(delta)
    K = prior.K
    gaps = _karmed_gaps(prior, num_samples, _rng(rng))
    clamped, raw = _gap_leading(gaps, epsilon, 8 * sigma**2 * L, sigma**2 / prior.sigma0**2)
    lead, se = _mean_se(clamped)
    raw_mean, raw_se = _mean_se(raw)
    low = epsilon * n + 2 * (math.sqrt(2 * L) + 2 * K) * prior.sigma0 * K * n * delta
    return BoundEstimate(lead + low, se, num_samples, {"leading": lead, "low_order": low},
                         {"leading_unclamped": raw_mean, "leading_unclamped_se": raw_se})


def ucb1_gap_leading_term(prior: GaussianPrior, sigma: float, delta: float, epsilon: float,
                          num_samples: int = DEFAULT_MC_SAMPLES, rng=0) -> BoundEstimate:
    """The gap-dependent leading term with an infinitely wide prior, as plotted for UCB1."""
    gaps = _karmed_gaps(prior, num_samples, _rng(rng))
    clamped, _ = _gap_leading(gaps, epsilon, 8 * sigma**2 * _log_inv(delta), 0.0)
    lead, se = _mean_se(clamped)
    return BoundEstimate(lead, se, num_samples, {"leading": lead})


# ------------------------------------------------------------ complexity term


def _density(prior, a: int, x: np.ndarray) -> np.ndarray:
    if isinstance(prior, GaussianPrior):
        return stats.norm.pdf(x, loc=prior.mu0[a], scale=prior.sigma0)
    return stats.beta.pdf(x, prior.alpha[a], prior.beta[a])


def _density_sup(prior, a: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """sup of arm a's prior density over [lo, hi], elementwise.

    Both densities are unimodal, monotone, or U-shaped, so the supremum is at
    an endpoint or at the mode projected onto the interval.
    """
    if isinstance(prior, GaussianPrior):
        return _density(prior, a, np.clip(prior.mu0[a], lo, hi))
    lo = np.maximum(lo, 0.0)
    hi = np.minimum(hi, 1.0)
    empty = lo > hi
    hi = np.where(empty, lo, hi)
    with np.errstate(divide="ignore"):
        best = np.maximum(_density(prior, a, lo), _density(prior, a, hi))
        al, be = prior.alpha[a], prior.beta[a]
        if al > 1 and be > 1:
            mode = (al - 1) / (al + be - 2)
            best = np.maximum(best, _density(prior, a, np.clip(mode, lo, hi)))
    return np.where(empty, 0.0, best)


def _complexity_samples(prior, spec: ComplexityTermSpec, n, rng) -> np.ndarray:
    """Per-draw values of sum_a h_a(theta*_a - xi_a), one per prior sample."""
    _check_n(n)
    if not isinstance(prior, (GaussianPrior, BetaPrior)):
        raise TypeError("the complexity term needs an independent per-arm prior")
    K = prior.K
    theta = sample_thetas(prior, rng, spec.num_mc_samples)
    total = np.zeros(spec.num_mc_samples)
    if K == 1:
        return total
    for a in range(K):
        best_other = np.delete(theta, a, axis=1).max(axis=1)
        if spec.xi_mode == ASYMPTOTIC:
            total += _density(prior, a, best_other)
        else:
            total += _density_sup(prior, a, best_other - 1.0 / math.sqrt(math.log(n)),
                                  best_other - 1.0 / n)
    return total


def complexity_term(prior, spec: ComplexityTermSpec, n, rng=0) -> BoundEstimate:
    """Monte Carlo estimate of sum_a E[h_a(theta*_a - xi_a(theta*_a))]."""
    value, se = _mean_se(_complexity_samples(prior, spec, n, _rng(rng)))
    return BoundEstimate(value, se, spec.num_mc_samples, {"complexity": value})


def lemma3_upper_bound(prior: GaussianPrior) -> BoundEstimate:
    mu = prior.mu0
    s2 = prior.sigma0**2
    diff = mu[:, None] - mu[None, :]
    w = np.exp(-diff**2 / (4 * s2))
    np.fill_diagonal(w, 0.0)
    value = float(w.sum() / (2 * math.sqrt(math.pi * s2)))
    return BoundEstimate(value, 0.0, 0, {"upper_bound": value})


def two_arm_complexity(prior: GaussianPrior) -> float:
    """Closed form of the asymptotic complexity term for K = 2 Gaussian arms."""
    if prior.K != 2:
        raise ValueError("closed form exists for K = 2 only")
    s2 = prior.sigma0**2
    gap = prior.mu0[0] - prior.mu0[1]
    return math.exp(-gap**2 / (4 * s2)) / math.sqrt(math.pi * s2)


# ----------------------------------------------------- prior-dependent bounds


def corollary2_bound(prior: GaussianPrior, sigma: float, delta: float, n,
                     spec: ComplexityTermSpec = ComplexityTermSpec(), rng=0) -> BoundEstimate:
    """Prior-dependent Bayes regret bound of Gaussian BayesUCB."""
    L = _log_inv(delta)
    thresh = sigma0_threshold(delta, n)
    if prior.sigma0**2 < thresh:
        raise UseAppendixC(f"sigma0^2 = {prior.sigma0**2:.3g} is below {thresh:.3g}; "
                           "use appendixC_small_sigma0_bound")
    K = prior.K
    logn = math.log(n)
    bracket = 8 * sigma**2 * L * logn - sigma**2 / (2 * prior.sigma0**2 * logn)
    ct = _complexity_samples(prior, spec, n, _rng(rng))
    ct_mean, ct_se = _mean_se(ct)
    low = (8 * sigma**2 * K * L * math.sqrt(logn)
           + 2 * (math.sqrt(2 * L) + 2 * K) * prior.sigma0 * K * n * delta + 1)
    lead = bracket * ct_mean
    return BoundEstimate(lead + low, abs(bracket) * ct_se, spec.num_mc_samples,
                         {"leading": lead, "low_order": low},
                         {"bracket": bracket, "complexity": ct_mean, "complexity_se": ct_se,
                          "sigma0_sq_threshold": thresh})


def appendixC_small_sigma0_bound(sigma0: float, delta: float, n, K: int) -> BoundEstimate:
    """O(1) regret bound of Gaussian BayesUCB when the prior is very narrow."""
    L = _log_inv(delta)
    thresh = sigma0_threshold(delta, n)
    if not sigma0**2 < thresh:
        raise BoundPreconditionError(f"sigma0^2 = {sigma0**2:.3g} is not below {thresh:.3g}")
    failure = (2 * math.sqrt(2 * L) + 1) / math.sqrt(8 * L * math.log(math.log(n))) * K * delta
    return BoundEstimate(failure + 1, 0.0, 0, {"failure": failure, "constant": 1.0},
                         {"sigma0_sq_threshold": thresh})


def thm4_ucb1_bound(prior: GaussianPrior, sigma: float, delta: float, n,
                    spec: ComplexityTermSpec = ComplexityTermSpec(), rng=0) -> BoundEstimate:
    """Prior-dependent Bayes regret bound of UCB1.

    The complexity term and sum_a E[Delta_a] are estimated from the same prior
    draws; with the same ``rng`` the complexity term equals the one used by
    :func:`corollary2_bound`.
    """
    L = _log_inv(delta)
    K = prior.K
    logn = math.log(n)
    gen = _rng(rng)
    ct = _complexity_samples(prior, spec, n, gen)
    gap_sums = gaps_from_means(sample_thetas(prior, gen, spec.num_mc_samples)).sum(axis=1)
    factor = 8 * sigma**2 * L * logn
    ct_mean, ct_se = _mean_se(ct)
    eg, eg_se = _mean_se(gap_sums)
    det = 8 * sigma**2 * K * L * math.sqrt(logn) + 2 * (math.sqrt(2 * L) + 2 * K) * sigma * K * n * delta + 1
    lead = factor * ct_mean
    se = math.hypot(factor * ct_se, eg_se)
    return BoundEstimate(lead + det + eg, se, spec.num_mc_samples,
                         {"leading": lead, "low_order": det, "expected_gaps": eg},
                         {"complexity": ct_mean, "complexity_se": ct_se, "expected_gaps_se": eg_se})


# ------------------------------------------------------------------ Bernoulli


def thm5_gap_bound(prior: BetaPrior, delta: float, epsilon: float, n,
                   num_samples: int = DEFAULT_MC_SAMPLES, rng=0) -> BoundEstimate:
    L = _log_inv(delta)
    K = prior.K
    gaps = _karmed_gaps(prior, num_samples, _rng(rng))
    clamped, raw = _gap_leading(gaps, epsilon, 2 * L, prior.alpha + prior.beta + 1)
    lead, se = _mean_se(clamped)
    raw_mean, raw_se = _mean_se(raw)
    low = epsilon * n + 2 * K * n * delta
    return BoundEstimate(lead + low, se, num_samples, {"leading": lead, "low_order": low},
                         {"leading_unclamped": raw_mean, "leading_unclamped_se": raw_se})


def thm5_prior_bound(prior: BetaPrior, delta: float, n,
                     spec: ComplexityTermSpec = ComplexityTermSpec(), rng=0) -> BoundEstimate:
    L = _log_inv(delta)
    _check_n(n)
    K = prior.K
    lam = float(np.min(prior.alpha + prior.beta + 1))
    limit = 2 * L * n * n * math.log(math.log(n))
    if lam > limit:
        raise BoundPreconditionError(f"lambda = {lam:.3g} exceeds {limit:.3g}")
    logn = math.log(n)
    bracket = 2 * L * logn - lam / (2 * logn)
    ct_mean, ct_se = _mean_se(_complexity_samples(prior, spec, n, _rng(rng)))
    low = 2 * K * L * math.sqrt(logn) + 2 * K * n * delta + 1
    lead = bracket * ct_mean
    return BoundEstimate(lead + low, abs(bracket) * ct_se, spec.num_mc_samples,
                         {"leading": lead, "low_order": low},
                         {"bracket": bracket, "lambda": lam, "complexity": ct_mean,
                          "complexity_se": ct_se})


def thm5_bernoulli_bounds(prior: BetaPrior, delta: float, epsilon: float, n,
                          spec: ComplexityTermSpec = ComplexityTermSpec(), rng=0,
                          ) -> tuple[BoundEstimate, BoundEstimate]:
    gen = _rng(rng)
    return (thm5_gap_bound(prior, delta, epsilon, n, spec.num_mc_samples, gen),
            thm5_prior_bound(prior, delta, n, spec, gen))


# --------------------------------------------------------------------- linear


def sigma0_max(prior: LinearGaussianPrior, action_set: FeaturizedActions) -> float:
    return math.sqrt(prior.max_eigenvalue) * action_set.L


def lemma8_variance_budget(sigma: float, sigma0max: float, d: int, n) -> float:
    """Worst-case sum over n rounds of posterior variances of the taken actions."""
    if sigma0max == 0 or n == 0:
        return 0.0
    ratio = sigma0max**2 / sigma**2
    return sigma0max**2 * d / math.log1p(ratio) * math.log1p(ratio * n / d)


def thm6_linear_bound(prior: LinearGaussianPrior, action_set: FeaturizedActions, sigma: float,
                      delta: float, epsilon: float, n, num_samples: int = DEFAULT_MC_SAMPLES,
                      rng=0, tail_quantile: float = 5.0) -> BoundEstimate:
    """Gap-dependent Bayes regret bound of linear BayesUCB.

    The bound holds with probability 1 - delta_star over the prior, where
    ||theta|| <= L_star. L_star is set to ||theta0|| + q sqrt(lambda_1 d)
    with q = ``tail_quantile``; delta_star is the chi-square tail bound on that
    event.
    """
    L = _log_inv(delta)
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    d, K = prior.d, action_set.K
    s0 = sigma0_max(prior, action_set)
    theta = sample_thetas(prior, _rng(rng), num_samples)
    gaps = gaps_from_means(theta @ action_set.vectors.T)
    if K > 1:
        masked = np.where(_suboptimal_mask(gaps), gaps, np.inf)
        inv_gap = 1.0 / np.maximum(masked.min(axis=1), epsilon)
    else:
        inv_gap = np.zeros(num_samples)
    e_inv, se_inv = _mean_se(inv_gap)
    factor = 8 * lemma8_variance_budget(sigma, s0, d, n) * L
    lam1 = prior.max_eigenvalue
    L_star = float(np.linalg.norm(prior.theta0)) + tail_quantile * math.sqrt(lam1 * d)
    delta_star = float(stats.chi2.sf(tail_quantile**2 * d, d)) if lam1 > 0 else 0.0
    lead = factor * e_inv
    low = epsilon * n + 4 * action_set.L * L_star * K * n * delta
    return BoundEstimate(lead + low, factor * se_inv, num_samples,
                         {"leading": lead, "low_order": low},
                         {"inv_min_gap": e_inv, "inv_min_gap_se": se_inv, "sigma0_max": s0,
                          "L_star": L_star, "delta_star": delta_star})


# ----------------------------------------------------------- sqrt(n) baselines


def sqrt_bound_karmed(sigma: float, sigma0: float, K: int, n) -> BoundEstimate:
    """Existing O(sqrt(n)) prior-dependent leading term for K-armed bandits (delta = 1/n)."""
    c = sigma**2 * K / sigma0**2
    # sqrt(n + c) - sqrt(c) rewritten to avoid cancellation for large c
    diff = n / (math.sqrt(n + c) + math.sqrt(c))
    value = 4 * math.sqrt(2 * sigma**2 * K * math.log(n)) * diff
    return BoundEstimate(value, 0.0, 0, {"leading": value})


def sqrt_bound_linear(sigma: float, sigma0max: float, d: int, n, delta: float) -> BoundEstimate:
    """Gap-free O(sqrt(n)) leading term for linear BayesUCB."""
    value = 2 * math.sqrt(2 * n * _log_inv(delta) * lemma8_variance_budget(sigma, sigma0max, d, n))
    return BoundEstimate(value, 0.0, 0, {"leading": value})


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, (int, np.integer)):
        return np.random.Generator(np.random.Philox(key=int(rng)))
    return as_generator(rng)
