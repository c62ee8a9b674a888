from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayesucb.core import (
    BanditInstance,
    BetaPrior,
    FeaturizedActions,
    GaussianPrior,
    IndexedActions,
    LinearGaussianPrior,
)
from bayesucb.policies import (
    BetaArms,
    GaussianArms,
    LinearPosterior,
    PolicyConfig,
    confidence_event_holds,
    init_state,
    select_action,
    ucb_index,
    update,
)
from oracles import beta_arm_posterior, gaussian_arm_posterior, linear_posterior_2d

RTOL = 1e-6


def close(got, want, scale):
    """Relative error, measured against max(|want|, scale) so means near zero are not penalized."""
    got, want = np.asarray(got, float), np.asarray(want, float)
    return np.all(np.abs(got - want) <= RTOL * np.maximum(np.abs(want), scale))


# -- conjugacy against quadrature


def gaussian_history_check(seed: int) -> bool:
    rng = np.random.default_rng(seed)
    K = 3
    mu0 = rng.normal(0, 2, K)
    sigma0 = rng.uniform(0.2, 3.0)
    sigma = rng.uniform(0.3, 2.0)
    state = GaussianArms(mu0, sigma0, sigma, 0.01)
    arms = rng.integers(0, K, 20)
    ys = rng.normal(0, 2, 20)
    for a, y in zip(arms, ys):
        update(state, int(a), float(y))
    ok = True
    for a in range(K):
        m, v = gaussian_arm_posterior(mu0[a], sigma0, sigma, ys[arms == a])
        ok &= close(state.post_mean[0, a], m, math.sqrt(v)) and close(state.post_var[0, a], v, 0.0)
    return bool(ok)


def beta_history_check(seed: int) -> bool:
    rng = np.random.default_rng(seed)
    K = 2
    alpha, beta = rng.uniform(0.5, 5, K), rng.uniform(0.5, 5, K)
    state = BetaArms(alpha, beta, 0.01)
    arms = rng.integers(0, K, 20)
    ys = (rng.random(20) < rng.random()).astype(float)
    for a, y in zip(arms, ys):
        update(state, int(a), float(y))
    ok = True
    for a in range(K):
        m, v = beta_arm_posterior(alpha[a], beta[a], ys[arms == a])
        ok &= close(state.post_mean[0, a], m, 0.0) and close(state.post_var[0, a], v, 0.0)
    return bool(ok)


def linear_history_check(seed: int) -> bool:
    rng = np.random.default_rng(seed)
    d, K = 2, 4
    X = rng.normal(size=(K, d))
    A = rng.normal(size=(d, d))
    cov0 = A @ A.T + 0.3 * np.eye(d)
    theta0 = rng.normal(size=d)
    sigma = rng.uniform(0.5, 2.0)
    state = LinearPosterior(theta0, cov0, X, sigma, 0.01)
    arms = rng.integers(0, K, 20)
    ys = rng.normal(0, 2, 20)
    for a, y in zip(arms, ys):
        update(state, int(a), float(y))
    m, c = linear_posterior_2d(theta0, cov0, sigma, X[arms], ys)
    scale = math.sqrt(np.max(np.diag(c)))
    return bool(close(state.post_mean[0], m, scale) and close(state.post_cov[0], c, np.max(np.diag(c))))


@pytest.mark.parametrize("check", [gaussian_history_check, beta_history_check, linear_history_check])
def test_posterior_matches_quadrature(check):
    assert all(check(seed) for seed in range(10))


def test_linear_with_basis_actions_matches_gaussian_arms():
    rng = np.random.default_rng(3)
    mu0 = np.array([0.5, -1.0, 2.0])
    lin = LinearPosterior(mu0, 0.7**2 * np.eye(3), np.eye(3), 1.3, 0.05)
    arms = GaussianArms(mu0, 0.7, 1.3, 0.05)
    for _ in range(30):
        a, y = int(rng.integers(3)), float(rng.normal())
        update(lin, a, y)
        update(arms, a, y)
    np.testing.assert_allclose(lin.arm_means(), arms.post_mean, rtol=1e-12)
    np.testing.assert_allclose(lin.widths(), arms.widths(), rtol=1e-12)


# -- index formulas


def test_gaussian_width_formula():
    s = GaussianArms([0.0, 0.0], 2.0, 1.0, 0.1)
    update(s, 0, 1.0)
    var0 = 1.0 / (0.25 + 1.0)
    assert s.widths()[0, 0] == pytest.approx(math.sqrt(2 * var0 * math.log(10)))
    assert s.widths()[0, 1] == pytest.approx(math.sqrt(2 * 4.0 * math.log(10)))


def test_beta_width_formula():
    s = BetaArms([2.0], [3.0], 0.05)
    update(s, 0, 1.0)
    assert s.widths()[0, 0] == pytest.approx(math.sqrt(math.log(20) / (2 * (3 + 3 + 1))))
    with pytest.raises(ValueError):
        update(s, 0, 0.5)


def test_ucb1_forced_initialisation_and_undefined_index():
    s = init_state(PolicyConfig.ucb1(3, 0.01))
    with pytest.raises(ValueError):
        ucb_index(s, 0)
    for t in range(3):
        assert select_action(s, t) == t
        update(s, t, float(t))
    # after one pull each the index is the sample mean plus sqrt(2 sigma^2 log(1/delta))
    assert ucb_index(s, 2) == pytest.approx(2.0 + math.sqrt(2 * math.log(100)))
    assert select_action(s, 3) == 2


def test_ties_go_to_lowest_index():
    s = GaussianArms(np.zeros(4), 1.0, 1.0, 0.1)
    assert select_action(s, 0) == 0


def test_bayes_ucb_prefers_high_prior_mean():
    s = init_state(PolicyConfig.bayes_ucb(GaussianPrior([0.0, 1.0, 0.5], 1.0), 0.01))
    assert select_action(s, 0) == 1


def test_policy_config_validation():
    with pytest.raises(ValueError):
        PolicyConfig.bayes_ucb(GaussianPrior([0.0], 1.0), 1.0)
    with pytest.raises(TypeError):
        PolicyConfig("bayesucb_gaussian", 0.1, prior=BetaPrior([1.0], [1.0]))
    with pytest.raises(ValueError):
        PolicyConfig("ucb1", 0.1)
    with pytest.raises(ValueError):
        PolicyConfig("thompson", 0.1)


def test_linear_needs_action_set_and_nonsingular_prior():
    cfg = PolicyConfig.bayes_ucb(LinearGaussianPrior([0.0, 0.0], np.eye(2)), 0.1)
    with pytest.raises(ValueError):
        init_state(cfg)
    with pytest.raises(np.linalg.LinAlgError):
        LinearPosterior([0.0, 0.0], [[1.0, 1.0], [1.0, 1.0]], np.eye(2), 1.0, 0.1)


def test_confidence_event():
    s = GaussianArms([0.0, 0.0], 1.0, 1.0, 0.1)
    w = s.widths()[0, 0]
    assert confidence_event_holds(s, BanditInstance(np.array([0.9 * w, -0.9 * w]), IndexedActions(2)))
    assert not confidence_event_holds(s, BanditInstance(np.array([1.1 * w, 0.0]), IndexedActions(2)))


# -- properties


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.floats(-5, 5)), max_size=30),
       st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_gaussian_posterior_variance_shrinks(history, sigma0, sigma):
    s = GaussianArms(np.zeros(3), sigma0, sigma, 0.1)
    prev = s.post_var.copy()
    for a, y in history:
        update(s, a, y)
        var = s.post_var
        assert var[0, a] < prev[0, a]
        assert np.all(var <= prev)
        prev = var.copy()
    assert np.all(s.post_var <= sigma0**2 * (1 + 1e-12))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.floats(-3, 3)), min_size=1, max_size=25))
def test_linear_covariance_stays_psd_and_shrinks(history):
    X = FeaturizedActions(np.array([[1.0, 0.0], [0.0, 1.0], [0.6, 0.8], [-0.8, 0.6]]))
    s = LinearPosterior(np.zeros(2), np.eye(2), X.vectors, 1.0, 0.1)
    before = s.action_variances().copy()
    for a, y in history:
        update(s, a, y)
    assert np.all(np.linalg.eigvalsh(s.post_cov[0]) > 0)
    assert np.all(s.action_variances() <= before + 1e-12)


def test_batched_state_equals_independent_runs():
    rng = np.random.default_rng(0)
    acts = rng.integers(0, 3, (20, 4))
    ys = rng.normal(size=(20, 4))
    batched = GaussianArms(np.zeros(3), 1.0, 1.0, 0.1, batch=4)
    singles = [GaussianArms(np.zeros(3), 1.0, 1.0, 0.1) for _ in range(4)]
    for t in range(20):
        batched.update(acts[t], ys[t])
        for b in range(4):
            update(singles[b], int(acts[t, b]), float(ys[t, b]))
    for b in range(4):
        np.testing.assert_array_equal(batched.indices()[b], singles[b].indices()[0])
