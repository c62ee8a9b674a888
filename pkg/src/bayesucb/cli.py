"""Command-line front end.

    bayesucb simulate --config CFG [overrides]
    bayesucb sweep    --config CFG [--parameter sigma0|prior_gap] [--grid 0.5,1,2]
    bayesucb bounds   --config CFG
    bayesucb bakeoff  --noise gaussian|rademacher --runs N

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds as B
from .config import ConfigError, ExperimentConfig, format_config, load_config
from .core import RngStream
from .simulator import bakeoff_grid, bayes_regret, sweep
from .svgplot import Series, line_chart

# bound evaluations draw from stream ids counting down from here, far from run indices
BOUND_STREAM_BASE = 1 << 63


def fmt(v) -> str:
    """Shortest round-trip text for numbers."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


# ------------------------------------------------------------------ commands


def cmd_simulate(config: ExperimentConfig) -> Path:
    out = Path(config.output)
    results = bayes_regret(config)
    rounds = np.arange(1, config.horizon + 1)
    rows = []
    for name, res in results.items():
        for t, m, s in zip(rounds, res.mean_cum_regret, res.std_error):
            rows.append((int(t), name, float(m), float(s)))
    write_csv(out / "regret_curves.csv", ["round", "policy", "mean_cum_regret", "std_error"], rows)
    series = [Series(name, rounds, r.mean_cum_regret, r.std_error) for name, r in results.items()]
    write_text(out / "regret_curves.svg",
               line_chart(series, f"{config.family} bandit, K = {config.K}", "round", "Bayes regret"))
    write_text(out / "config.cfg", format_config(config))
    return out


def _sweep_series(points, config: ExperimentConfig):
    """(series name, per-point value, per-point SE) for every plotted trend."""
    series = {}
    for p in points:
        for name, res in p.results.items():
            series.setdefault(name, []).append((res.final_mean, res.final_se))
        for name, est in p.bounds.items():
            value = est.components.get("leading", est.value)
            se = est.std_error
            series.setdefault(name if name.startswith(("sqrt", "ucb1_")) else f"{name}_leading", []).append((value, se))
    return series


def cmd_sweep(config: ExperimentConfig, parameter: str | None = None, grid=None) -> Path:
    parameter = parameter or config.sweep_parameter
    grid = config.sweep_grid if grid is None else tuple(grid)
    if parameter is None:
        raise ConfigError("no sweep parameter given")
    if not grid:
        raise ConfigError("sweep grid is empty")
    config.with_parameter(parameter, grid[0])  # validates applicability early
    points = sweep(config, parameter, grid)
    series = _sweep_series(points, config)
    rows = [(p.value, name, vals[i][0], vals[i][1])
            for i, p in enumerate(points) for name, vals in series.items()]
    out = Path(config.output)
    write_csv(out / "sweep.csv", ["grid_value", "series_name", "value", "std_error"], rows)
    xs = np.array([p.value for p in points])
    plot = [Series(name, xs, np.array([v for v, _ in vals]), np.array([s for _, s in vals]),
                   dashed=name not in config.policies)
            for name, vals in series.items()]
    label = {"sigma0": "prior width sigma0", "prior_gap": "prior gap Delta0"}[parameter]
    write_text(out / "sweep.svg", line_chart(plot, f"{config.family} bandit sweep", label,
                                             "regret / bound at n", log_y=True))
    write_text(out / "config.cfg", format_config(config))
    return out


def bound_rows(config: ExperimentConfig) -> list[tuple[str, float, float, str, str]]:
    """One (name, value, std_error, status, components) row per applicable bound.

    Precondition failures are reported in the status column instead of raising.
    """
    n, K = config.horizon, config.K
    delta, eps = config.delta_value, config.epsilon_value
    prior = config.prior()
    spec = B.ComplexityTermSpec(config.xi_mode, config.mc_samples)
    wanted = set(config.bounds)
    rows = []

    def stream(i):
        return RngStream(config.seed, BOUND_STREAM_BASE - i)

    def add(name, fn, error_marker="error"):
        if name.split(":")[0] not in wanted:
            return
        try:
            est = fn()
        except B.UseAppendixC:
            rows.append((name, math.nan, math.nan, "use_appendix_c", ""))
            return
        except (ValueError, TypeError) as exc:
            rows.append((name, math.nan, math.nan, f"{error_marker}: {exc}", ""))
            return
        comps = ";".join(f"{k}={fmt(v)}" for k, v in {**est.components, **est.extras}.items())
        rows.append((name, est.value, est.std_error, "ok", comps))

    if config.family == "gaussian":
        s, s0 = config.sigma, config.sigma0
        add("thm1", lambda: B.thm1_leading_term(prior, s, delta, eps, n, config.mc_samples, stream(1)))
        add("ucb1_leading", lambda: B.ucb1_gap_leading_term(prior, s, delta, eps, config.mc_samples, stream(1)))
        for mode in (B.ASYMPTOTIC, B.RANGE_SUP):
            add(f"complexity:{mode}", lambda m=mode: B.complexity_term(
                prior, B.ComplexityTermSpec(m, config.mc_samples), n, stream(2)))
        add("lemma3", lambda: B.lemma3_upper_bound(prior))
        add("corollary2", lambda: B.corollary2_bound(prior, s, delta, n, spec, stream(2)))
        add("appendix_c", lambda: B.appendixC_small_sigma0_bound(s0, delta, n, K), "threshold_violation")
        add("thm4", lambda: B.thm4_ucb1_bound(prior, s, delta, n, spec, stream(2)))
        add("sqrt_karmed", lambda: B.sqrt_bound_karmed(s, s0, K, n))
    elif config.family == "bernoulli":
        add("thm5_gap", lambda: B.thm5_gap_bound(prior, delta, eps, n, config.mc_samples, stream(3)))
        add("thm5_prior", lambda: B.thm5_prior_bound(prior, delta, n, spec, stream(4)))
        for mode in (B.ASYMPTOTIC, B.RANGE_SUP):
            add(f"complexity:{mode}", lambda m=mode: B.complexity_term(
                prior, B.ComplexityTermSpec(m, config.mc_samples), n, stream(4)))
    else:
        actions = config.action_set()
        s0max = B.sigma0_max(prior, actions)
        add("thm6", lambda: B.thm6_linear_bound(prior, actions, config.sigma, delta, eps, n,
                                                config.mc_samples, stream(5)))
        add("sqrt_linear", lambda: B.sqrt_bound_linear(config.sigma, s0max, config.d, n, delta))
        add("lemma8", lambda: B.BoundEstimate(B.lemma8_variance_budget(config.sigma, s0max, config.d, n)))
    return rows


def cmd_bounds(config: ExperimentConfig) -> Path:
    out = Path(config.output)
    write_csv(out / "bounds.csv", ["name", "value", "std_error", "status", "components"], bound_rows(config))
    return out


def cmd_bakeoff(noise: str, runs: int, horizon: int, seed: int, out: Path, threads: int) -> Path:
    rows = bakeoff_grid(noise, runs, horizon=horizon, seed=seed, threads=threads)
    write_csv(out / f"bakeoff_{noise}.csv",
              ["rank", "K", "sigma", "prior_gap", "sigma0", "difference", "std_error"],
              [(i, r.K, r.sigma, r.prior_gap, r.sigma0, r.difference, r.std_error)
               for i, r in enumerate(rows)])
    idx = np.arange(len(rows))
    diff = np.array([r.difference for r in rows])
    se = np.array([r.std_error for r in rows])
    chart = line_chart([Series("UCB1 - BayesUCB", idx, diff, se), Series("zero", idx, 0 * diff, dashed=True)],
                       f"Regret difference, {noise} noise", "instance (sorted)", "regret difference")
    write_text(out / f"bakeoff_{noise}.svg", chart)
    return out


# --------------------------------------------------------------------- main


def _grid(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    for flag, name in (("seed", "seed"), ("runs", "runs"), ("horizon", "horizon"), ("delta", "delta"),
                       ("epsilon", "epsilon"), ("noise", "noise"), ("out", "output"), ("threads", "threads")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[name] = str(value) if flag == "out" else value
    return config.replace(**changes) if changes else config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bayesucb", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_config=True):
        p.add_argument("--config", required=need_config, help="experiment config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--runs", type=int)
        p.add_argument("--horizon", type=int)
        p.add_argument("--delta", type=float)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--out")
        p.add_argument("--threads", type=int)

    p = sub.add_parser("simulate", help="Bayes regret curves")
    common(p)
    p.add_argument("--noise", choices=("gaussian", "rademacher"))
    p = sub.add_parser("sweep", help="regret and bounds across a parameter grid")
    common(p)
    p.add_argument("--noise", choices=("gaussian", "rademacher"))
    p.add_argument("--parameter", choices=("sigma0", "prior_gap"))
    p.add_argument("--grid", type=_grid, help="comma-separated grid values")
    p = sub.add_parser("bounds", help="evaluate every applicable regret bound")
    common(p)
    p = sub.add_parser("bakeoff", help="UCB1 vs BayesUCB on the 81-instance grid")
    p.add_argument("--noise", choices=("gaussian", "rademacher"), required=True)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "bakeoff":
            if args.runs < 1 or args.horizon < 1 or args.threads < 1:
                raise ConfigError("--runs, --horizon and --threads must be >= 1")
            cmd_bakeoff(args.noise, args.runs, args.horizon, args.seed, Path(args.out), args.threads)
            return 0
        config = _apply_overrides(load_config(args.config), args)
        if args.command == "simulate":
            cmd_simulate(config)
        elif args.command == "sweep":
            cmd_sweep(config, args.parameter, args.grid)
        else:
            cmd_bounds(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report any runtime failure with exit code 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
