"""Experiment configuration and its ``section.key = value`` text format.

Example::

    # 10-armed Gaussian bandit, prior gap 1
    environment.family = gaussian
    environment.K = 10
    prior.sigma0 = 1.0
    run.horizon = 1000
    sweep.parameter = sigma0
    sweep.grid = 0.25, 0.5, 1.0, 2.0

Unlisted keys keep their defaults. ``auto`` for ``run.delta`` and
``run.epsilon`` means 1 / horizon.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    BetaPrior,
    FeaturizedActions,
    GaussianPrior,
    IndexedActions,
    LinearGaussianPrior,
    RngStream,
)
from .environments import BernoulliReward, make_linear_action_set, make_noise
from .policies import PolicyConfig

FAMILIES = ("gaussian", "bernoulli", "linear")
NOISE_KINDS = ("gaussian", "rademacher")
POLICIES = ("bayesucb", "ucb1")
SWEEP_PARAMETERS = ("sigma0", "prior_gap")
BOUND_NAMES = (
    "thm1", "ucb1_leading", "complexity", "lemma3", "corollary2", "appendix_c", "thm4",
    "sqrt_karmed", "thm5_gap", "thm5_prior", "thm6", "sqrt_linear", "lemma8",
)

# stream id reserved for the linear action set; run indices use 0, 1, 2, ...
ACTION_SET_STREAM = (1 << 64) - 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "gaussian"
    noise: str = "gaussian"
    K: int = 10
    d: int = 10
    sigma: float = 1.0
    sigma0: float = 1.0
    prior_gap: float = 1.0
    mu0: tuple[float, ...] | None = None
    alpha: tuple[float, ...] = (1.0,)
    beta: tuple[float, ...] = (1.0,)
    policies: tuple[str, ...] = ("bayesucb", "ucb1")
    horizon: int = 1000
    runs: int = 10_000
    delta: float | None = None
    epsilon: float | None = None
    seed: int = 0
    threads: int = 1
    sweep_parameter: str | None = None
    sweep_grid: tuple[float, ...] = ()
    bounds: tuple[str, ...] = BOUND_NAMES
    mc_samples: int = 100_000
    xi_mode: str = "asymptotic"
    output: str = "out"

    def __post_init__(self):
        _validate(self)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    # -- derived quantities

    @property
    def delta_value(self) -> float:
        return 1.0 / self.horizon if self.delta is None else self.delta

    @property
    def epsilon_value(self) -> float:
        return 1.0 / self.horizon if self.epsilon is None else self.epsilon

    def prior(self):
        if self.family == "gaussian":
            return GaussianPrior(self.prior_means(), self.sigma0)
        if self.family == "bernoulli":
            return BetaPrior(np.broadcast_to(self.alpha, (self.K,)), np.broadcast_to(self.beta, (self.K,)))
        return LinearGaussianPrior(self.prior_means(), self.sigma0**2 * np.eye(self.d))

    def prior_means(self) -> np.ndarray:
        if self.family == "linear":
            theta0 = -np.ones(self.d)
            theta0[0] = self.prior_gap
            return theta0
        if self.mu0 is not None:
            return np.array(self.mu0, dtype=float)
        mu0 = np.zeros(self.K)
        mu0[0] = self.prior_gap
        return mu0

    def action_set(self) -> IndexedActions | FeaturizedActions:
        if self.family == "linear":
            return make_linear_action_set(self.K, self.d, RngStream(self.seed, ACTION_SET_STREAM))
        return IndexedActions(self.K)

    def noise_model(self):
        if self.family == "bernoulli":
            return BernoulliReward()
        if self.family == "linear":
            return make_noise("linear", self.sigma)
        return make_noise(self.noise, self.sigma)

    def policy_configs(self) -> dict[str, PolicyConfig]:
        out = {}
        for name in self.policies:
            if name == "ucb1":
                out[name] = PolicyConfig.ucb1(self.K, self.delta_value, self.sigma)
            else:
                out[name] = PolicyConfig.bayes_ucb(self.prior(), self.delta_value, self.sigma)
        return out

    def with_sweep_value(self, value: float) -> "ExperimentConfig":
        if self.sweep_parameter is None:
            raise ConfigError("no sweep parameter configured")
        return self.with_parameter(self.sweep_parameter, value)

    def with_parameter(self, parameter: str, value: float) -> "ExperimentConfig":
        if parameter == "sigma0":
            return self.replace(sigma0=float(value))
        if parameter == "prior_gap":
            if self.mu0 is not None:
                raise ConfigError("prior_gap sweep conflicts with explicit prior.mu0")
            if self.family == "bernoulli":
                raise ConfigError("prior_gap does not apply to Beta priors")
            return self.replace(prior_gap=float(value))
        raise ConfigError(f"unknown sweep parameter {parameter!r}")


def _validate(c: ExperimentConfig) -> None:
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    need(c.family in FAMILIES, f"environment.family must be one of {FAMILIES}")
    need(c.noise in NOISE_KINDS, f"environment.noise must be one of {NOISE_KINDS}")
    need(c.family != "linear" or c.noise == "gaussian", "linear bandits use Gaussian noise")
    need(c.K >= 1, "environment.K must be >= 1")
    need(c.d >= 1, "environment.d must be >= 1")
    need(c.family != "linear" or c.K >= c.d, "linear bandits need K >= d")
    need(c.sigma > 0 and math.isfinite(c.sigma), "environment.sigma must be positive")
    need(c.sigma0 > 0 and math.isfinite(c.sigma0), "prior.sigma0 must be positive")
    need(math.isfinite(c.prior_gap), "prior.gap must be finite")
    need(c.mu0 is None or len(c.mu0) == c.K, "prior.mu0 must have K entries")
    for name in ("alpha", "beta"):
        v = getattr(c, name)
        need(len(v) in (1, c.K) and all(x > 0 for x in v), f"prior.{name} must be 1 or K positive values")
    need(len(c.policies) > 0, "policy.list is empty")
    for p in c.policies:
        need(p in POLICIES, f"unknown policy {p!r}")
    need(len(set(c.policies)) == len(c.policies), "duplicate policy")
    need("ucb1" not in c.policies or c.family == "gaussian", "UCB1 runs on Gaussian-family bandits only")
    need(c.horizon >= 1, "run.horizon must be >= 1")
    need(c.runs >= 1, "run.runs must be >= 1")
    need(c.delta is None or 0 < c.delta < 1, "run.delta must lie in (0, 1)")
    need(c.epsilon is None or c.epsilon > 0, "run.epsilon must be positive")
    need(0 <= c.seed < 2**64, "run.seed must be an unsigned 64-bit integer")
    need(c.threads >= 1, "run.threads must be >= 1")
    need(c.sweep_parameter is None or c.sweep_parameter in SWEEP_PARAMETERS,
         f"sweep.parameter must be one of {SWEEP_PARAMETERS}")
    need(all(math.isfinite(g) for g in c.sweep_grid), "sweep.grid values must be finite")
    for b in c.bounds:
        need(b in BOUND_NAMES, f"unknown bound {b!r}")
    need(c.mc_samples >= 1, "bounds.mc_samples must be >= 1")
    need(c.xi_mode in ("asymptotic", "range_sup"), "bounds.xi_mode must be asymptotic or range_sup")


# -------------------------------------------------------------- text format

# key -> (field, kind); kinds: int, float, str, floats, strs, optional float/str, auto float
_KEYS = {
    "environment.family": ("family", "str"),
    "environment.noise": ("noise", "str"),
    "environment.K": ("K", "int"),
    "environment.d": ("d", "int"),
    "environment.sigma": ("sigma", "float"),
    "prior.sigma0": ("sigma0", "float"),
    "prior.gap": ("prior_gap", "float"),
    "prior.mu0": ("mu0", "floats?"),
    "prior.alpha": ("alpha", "floats"),
    "prior.beta": ("beta", "floats"),
    "policy.list": ("policies", "strs"),
    "run.horizon": ("horizon", "int"),
    "run.runs": ("runs", "int"),
    "run.delta": ("delta", "auto"),
    "run.epsilon": ("epsilon", "auto"),
    "run.seed": ("seed", "int"),
    "run.threads": ("threads", "int"),
    "sweep.parameter": ("sweep_parameter", "str?"),
    "sweep.grid": ("sweep_grid", "floats"),
    "bounds.list": ("bounds", "strs"),
    "bounds.mc_samples": ("mc_samples", "int"),
    "bounds.xi_mode": ("xi_mode", "str"),
    "output.dir": ("output", "str"),
}


def _split(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def _parse_value(kind: str, text: str):
    text = text.strip()
    if kind.endswith("?") and text in ("", "none"):
        return None
    kind = kind.rstrip("?")
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind == "auto":
        return None if text == "auto" else float(text)
    if kind == "str":
        return text
    if kind == "floats":
        return tuple(float(p) for p in _split(text))
    if kind == "strs":
        return tuple(_split(text))
    raise AssertionError(kind)


def _format_value(kind: str, value) -> str:
    if value is None:
        return "auto" if kind == "auto" else "none"
    if isinstance(value, tuple):
        return ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name, kind = _KEYS[key]
        try:
            values[name] = _parse_value(kind, value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    if values.get("bounds") == ("all",):
        values["bounds"] = BOUND_NAMES
    return ExperimentConfig(**values)


def format_config(config: ExperimentConfig) -> str:
    lines = []
    for key, (name, kind) in _KEYS.items():
        lines.append(f"{key} = {_format_value(kind, getattr(config, name))}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
