from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayesucb.config import (
    BOUND_NAMES,
    ConfigError,
    ExperimentConfig,
    format_config,
    load_config,
    parse_config,
)
from bayesucb.core import BetaPrior, FeaturizedActions, GaussianPrior, LinearGaussianPrior


def test_defaults_match_reference_setup():
    c = ExperimentConfig()
    assert (c.K, c.horizon, c.runs, c.sigma) == (10, 1000, 10_000, 1.0)
    assert c.delta_value == c.epsilon_value == 1e-3
    np.testing.assert_array_equal(c.prior_means(), [1.0] + [0.0] * 9)


def test_parse_comments_and_lists():
    c = parse_config("""
        # a comment
        environment.K = 3   # trailing comment
        policy.list = bayesucb
        sweep.parameter = prior_gap
        sweep.grid = 0.5, 1, 2
        run.delta = 0.01
        bounds.list = all
    """)
    assert c.K == 3 and c.policies == ("bayesucb",)
    assert c.sweep_grid == (0.5, 1.0, 2.0) and c.delta == 0.01
    assert c.bounds == BOUND_NAMES


@pytest.mark.parametrize("text", [
    "environment.K = 0",
    "environment.family = poisson",
    "environment.noise = cauchy",
    "run.delta = 1.5",
    "prior.sigma0 = -1",
    "nonsense.key = 1",
    "environment.K 3",
    "environment.K = three",
    "environment.family = bernoulli\npolicy.list = ucb1",
    "policy.list = bayesucb, bayesucb",
    "environment.family = linear\nenvironment.K = 3\nenvironment.d = 5",
    "bounds.list = thm99",
])
def test_invalid_configs_raise(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


def test_priors_per_family():
    assert isinstance(ExperimentConfig().prior(), GaussianPrior)
    b = ExperimentConfig(family="bernoulli", K=3, alpha=(2.0,), beta=(1.0, 2.0, 3.0),
                         policies=("bayesucb",)).prior()
    assert isinstance(b, BetaPrior) and b.alpha.tolist() == [2.0, 2.0, 2.0]
    lin = ExperimentConfig(family="linear", K=20, d=4, sigma0=0.5, prior_gap=2.0, policies=("bayesucb",))
    p = lin.prior()
    assert isinstance(p, LinearGaussianPrior)
    np.testing.assert_array_equal(p.theta0, [2.0, -1.0, -1.0, -1.0])
    np.testing.assert_allclose(p.cov0, 0.25 * np.eye(4))
    acts = lin.action_set()
    assert isinstance(acts, FeaturizedActions) and acts.vectors.shape == (20, 4)
    np.testing.assert_array_equal(acts.vectors, lin.action_set().vectors)


def test_with_parameter():
    c = ExperimentConfig()
    assert c.with_parameter("sigma0", 0.25).sigma0 == 0.25
    assert c.with_parameter("prior_gap", 4).prior_gap == 4.0
    with pytest.raises(ConfigError):
        ExperimentConfig(family="bernoulli", policies=("bayesucb",)).with_parameter("prior_gap", 1)
    with pytest.raises(ConfigError):
        c.with_parameter("K", 3)


configs = st.builds(
    ExperimentConfig,
    family=st.just("gaussian"),
    noise=st.sampled_from(["gaussian", "rademacher"]),
    K=st.integers(1, 50),
    sigma=st.floats(0.01, 100),
    sigma0=st.floats(0.01, 100),
    prior_gap=st.floats(-10, 10),
    policies=st.sampled_from([("bayesucb",), ("ucb1",), ("bayesucb", "ucb1")]),
    horizon=st.integers(1, 10**6),
    runs=st.integers(1, 10**6),
    delta=st.one_of(st.none(), st.floats(1e-12, 0.999)),
    epsilon=st.one_of(st.none(), st.floats(1e-12, 10)),
    seed=st.integers(0, 2**64 - 1),
    threads=st.integers(1, 64),
    sweep_parameter=st.sampled_from([None, "sigma0", "prior_gap"]),
    sweep_grid=st.lists(st.floats(0.01, 10), max_size=5).map(tuple),
    xi_mode=st.sampled_from(["asymptotic", "range_sup"]),
    output=st.sampled_from(["out", "results/run 1"]),
)


@settings(max_examples=80)
@given(configs)
def test_round_trip_is_lossless(cfg):
    text = format_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert format_config(again) == text


def test_round_trip_of_other_families():
    for cfg in (ExperimentConfig(family="bernoulli", K=3, alpha=(0.5, 1.0, 2.0), beta=(3.0,), policies=("bayesucb",)),
                ExperimentConfig(family="linear", K=30, d=5, policies=("bayesucb",)),
                ExperimentConfig(mu0=(0.1, 0.2, 0.3), K=3)):
        assert parse_config(format_config(cfg)) == cfg
