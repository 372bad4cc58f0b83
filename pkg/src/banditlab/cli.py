"""Config-driven command line: run experiments, reproduce the benchmark
tables and figure data, evaluate tail bounds, and emit CSV/JSON.

Subcommands: ``simulate``, ``reproduce {table1,table2,fig1,fig2}``,
``bounds``, ``fragility``. Every command is a pure function of its arguments,
the config bytes and the master seed; CSV numbers carry 17 significant digits
so doubles round-trip exactly.

Exit codes: 0 success, 2 config or validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .analysis import (
    bound_anytime,
    bound_k_armed,
    bound_k_armed_optimal,
    bound_linear,
    empirical_tail,
    histogram,
    neat_form_bound,
    summarize,
)
from .bonus import BonusSchedule
from .core import BanditInstance, EpisodeResult, LinearInstance, RunConfig
from .policies import PolicySpec
from .simulator import stream_monte_carlo

__all__ = [
    "main",
    "console_main",
    "ConfigError",
    "parse_config",
    "bound_for",
    "build_table_policy",
    "TABLE_POLICIES",
    "TABLE_KAPPAS",
    "DEFAULT_SEED",
    "FRAGILITY_MEANS",
]

DEFAULT_SEED = 20240
TABLE_POLICIES = ("SE", "UCB", "TS", "SE_new", "UCB_new", "UCB_any")
TABLE_KAPPAS = (0.1, 0.2, 0.4, 0.8)
TABLE_HORIZON = 500
TABLE_REPLICATIONS = 5000
TABLE_MEANS = {"table1": (0.2, 0.8), "table2": (0.2, 0.4, 0.6, 0.8)}
FRAGILITY_MEANS = (1.0, 0.0)


class ConfigError(Exception):
    """Invalid configuration; the message names the offending field."""


def _fmt(v: float) -> str:
    return f"{v:.17g}"


# ---------------------------------------------------------------------------
# config parsing

_INSTANCE_MAB_KEYS = {"means", "sigma0", "horizon"}
_INSTANCE_LIN_KEYS = {"theta", "n_actions", "sigma0", "horizon", "action_set"}
_POLICY_KEYS = {"kind", "bonus", "kappa", "explore_budget", "reinvert_every"}
_BONUS_KEYS = {"design", "sigma", "eta", "kappa", "eta1", "eta2"}
_TOP_KEYS = {
    "instance",
    "policy",
    "replications",
    "master_seed",
    "record_trace",
    "tail_thresholds",
    "tail_functional",
}


def _check_keys(section: dict, allowed: set, required: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(section)
    if missing:
        raise ConfigError(f"{where}: missing field(s) {sorted(missing)}")


def _parse_instance(section) -> BanditInstance | LinearInstance:
    if not isinstance(section, dict):
        raise ConfigError("instance: must be an object")
    if "means" in section:
        _check_keys(section, _INSTANCE_MAB_KEYS, {"means", "sigma0", "horizon"}, "instance")
        try:
            return BanditInstance(
                means=tuple(section["means"]),
                noise_scale=float(section["sigma0"]),
                horizon=int(section["horizon"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"instance: {exc}") from exc
    if "theta" in section:
        _check_keys(section, _INSTANCE_LIN_KEYS, {"theta", "n_actions", "sigma0", "horizon"}, "instance")
        try:
            return LinearInstance(
                theta=tuple(section["theta"]),
                n_actions=int(section["n_actions"]),
                noise_scale=float(section["sigma0"]),
                horizon=int(section["horizon"]),
                action_scheme=section.get("action_set", "fixed"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"instance: {exc}") from exc
    raise ConfigError("instance: missing field 'means' (or 'theta' for linear)")


def _parse_bonus(section, instance, where: str = "policy.bonus") -> BonusSchedule:
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: must be an object")
    _check_keys(section, _BONUS_KEYS, {"design"}, where)
    design = section["design"]
    kwargs = {}
    if design in ("standard", "new_sqrt_t", "optimal_k"):
        kwargs["horizon"] = instance.horizon
    if design in ("optimal_k", "any_time"):
        kwargs["n_arms"] = instance.n_arms
    if design == "linear":
        kwargs["dim"] = instance.dim
    try:
        if "kappa" in section:
            if "eta" in section or "eta1" in section:
                raise ConfigError(f"{where}: give either kappa or eta, not both")
            return BonusSchedule.from_kappa(design, float(section["kappa"]), **kwargs)
        if design == "optimal_k":
            return BonusSchedule(
                design,
                sigma=float(section.get("sigma", 1.0)),
                eta1=float(section["eta1"]),
                eta2=float(section["eta2"]),
                **kwargs,
            )
        return BonusSchedule(
            design,
            sigma=float(section.get("sigma", 1.0)),
            eta=float(section["eta"]),
            **kwargs,
        )
    except KeyError as exc:
        raise ConfigError(f"{where}: missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


_POLICY_KEYS_BY_KIND = {
    "se": {"kind", "bonus"},
    "ucb": {"kind", "bonus"},
    "linucb": {"kind", "bonus", "reinvert_every"},
    "ts": {"kind", "kappa"},
    "etc": {"kind", "explore_budget"},
    "linrandom": {"kind"},
}


def _parse_policy(section, instance) -> PolicySpec:
    if not isinstance(section, dict):
        raise ConfigError("policy: must be an object")
    _check_keys(section, _POLICY_KEYS, {"kind"}, "policy")
    kind = section["kind"]
    if kind in _POLICY_KEYS_BY_KIND:
        # reject fields another policy kind would consume (typo guard)
        _check_keys(section, _POLICY_KEYS_BY_KIND[kind], {"kind"}, f"policy[{kind}]")
    try:
        if kind in ("se", "ucb", "linucb"):
            if "bonus" not in section:
                raise ConfigError("policy: missing field 'bonus'")
            return PolicySpec(
                kind,
                bonus=_parse_bonus(section["bonus"], instance),
                reinvert_every=int(section.get("reinvert_every", 256)),
            )
        if kind == "ts":
            if "kappa" not in section:
                raise ConfigError("policy: missing field 'kappa'")
            return PolicySpec(kind, kappa=float(section["kappa"]))
        if kind == "etc":
            budget = section.get("explore_budget")
            return PolicySpec(kind, explore_budget=None if budget is None else int(budget))
        if kind == "linrandom":
            return PolicySpec(kind)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"policy: {exc}") from exc
    raise ConfigError(f"policy.kind: unknown kind {kind!r}")


def parse_config(data: dict, seed_override: int | None = None,
                 replications_override: int | None = None) -> tuple[RunConfig, dict]:
    """Validate a config document; returns (RunConfig, extras).

    extras carries the optional tail-analysis settings.
    """
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be an object")
    _check_keys(data, _TOP_KEYS, {"instance", "policy", "replications"}, "config")
    instance = _parse_instance(data["instance"])
    policy = _parse_policy(data["policy"], instance)
    replications = int(data["replications"])
    if replications_override is not None:
        replications = replications_override
    seed = int(data.get("master_seed", DEFAULT_SEED))
    if seed_override is not None:
        seed = seed_override
    functional = data.get("tail_functional", "pseudo")
    if functional not in ("pseudo", "empirical"):
        raise ConfigError(f"tail_functional: unknown functional {functional!r}")
    thresholds = data.get("tail_thresholds")
    if thresholds is not None and (
        not isinstance(thresholds, list) or not thresholds
    ):
        raise ConfigError("tail_thresholds: must be a non-empty list")
    try:
        cfg = RunConfig(
            instance=instance,
            policy=policy,
            replications=replications,
            master_seed=seed,
            record_trace=bool(data.get("record_trace", False)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg, {"tail_thresholds": thresholds, "tail_functional": functional}


# ---------------------------------------------------------------------------
# bound dispatch

def bound_for(
    spec: PolicySpec, instance: BanditInstance | LinearInstance
) -> tuple[str, Callable[[float], float]] | None:
    """The theorem bound covering this (policy, instance), if any."""
    if spec.kind == "linucb":
        d, t, s = instance.dim, instance.horizon, spec.bonus
        return "thm_linear", lambda x: bound_linear(x, d, t, s.sigma, s.eta)
    if spec.kind not in ("se", "ucb") or spec.bonus is None:
        return None
    s = spec.bonus
    k, t = instance.n_arms, instance.horizon
    if s.design == "new_sqrt_t":
        return "thm_k", lambda x: bound_k_armed(x, k, t, s.sigma, s.eta)
    if s.design == "optimal_k":
        return "thm_k_opt", lambda x: bound_k_armed_optimal(
            x, k, t, s.sigma, s.eta1, s.eta2
        )
    if s.design == "any_time" and spec.kind == "ucb":
        return "thm_any_time", lambda x: bound_anytime(x, k, t, s.sigma, s.eta)
    return None


# ---------------------------------------------------------------------------
# CSV/JSON writers

def _policy_columns(spec: PolicySpec) -> tuple[str, str, float]:
    if spec.kind == "ts":
        return "ts", "", spec.kappa
    if spec.bonus is None:
        return spec.kind, "", float("nan")
    return spec.kind, spec.bonus.design, spec.bonus.kappa


def _write_results_csv(
    path: Path, cfg: RunConfig, results_iter
) -> list[EpisodeResult]:
    policy, design, knob = _policy_columns(cfg.policy)
    inst = cfg.instance
    k = inst.n_arms if isinstance(inst, BanditInstance) else inst.n_actions
    collected = []
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["path_id", "policy", "design", "kappa_or_eta", "K", "T", "sigma0",
             "cumulative_reward", "pseudo_regret", "empirical_regret", "pulls"]
        )
        for path_id, r in enumerate(results_iter):
            w.writerow(
                [path_id, policy, design, _fmt(knob), k, inst.horizon,
                 _fmt(inst.noise_scale), _fmt(r.cumulative_reward),
                 _fmt(r.pseudo_regret), _fmt(r.empirical_regret),
                 ";".join(str(int(p)) for p in r.pulls)]
            )
            collected.append(r)
    return collected


def _write_tail_csv(path: Path, rows: list[dict]) -> None:
    fields = ["scenario", "policy", "design", "kappa", "sigma0", "functional",
              "threshold", "empirical_prob", "ci_low", "ci_high",
              "bound_name", "bound_raw", "bound_clamped"]
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for row in rows:
            w.writerow(row)


def _tail_rows(reports, meta: dict, functional: str) -> list[dict]:
    rows = []
    for rep in reports:
        rows.append(
            {**meta,
             "functional": functional,
             "threshold": _fmt(rep.threshold),
             "empirical_prob": _fmt(rep.empirical_prob),
             "ci_low": _fmt(rep.ci_low),
             "ci_high": _fmt(rep.ci_high),
             "bound_name": rep.bound_name or "",
             "bound_raw": "" if rep.bound_value is None else _fmt(rep.bound_value),
             "bound_clamped": "" if rep.bound_clamped is None else _fmt(rep.bound_clamped)}
        )
    return rows


# ---------------------------------------------------------------------------
# commands

def _resolve_workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get("BANDIT_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return 1


def cmd_simulate(args) -> int:
    try:
        raw = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 3
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        print(f"error: config parse error at line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return 2
    try:
        cfg, extras = parse_config(data, args.seed, args.replications)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    workers = _resolve_workers(args)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 3
    try:
        results = _write_results_csv(
            out / "results.csv", cfg, stream_monte_carlo(cfg, workers=workers)
        )
        policy, design, knob = _policy_columns(cfg.policy)
        summary = {"policy": policy, "design": design, "kappa_or_eta": knob,
                   "master_seed": cfg.master_seed, **summarize(results)}
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
        if extras["tail_thresholds"]:
            bound = bound_for(cfg.policy, cfg.instance)
            reports = empirical_tail(
                results,
                extras["tail_thresholds"],
                functional=extras["tail_functional"],
                bound_name=None if bound is None else bound[0],
                bound_fn=None if bound is None else bound[1],
            )
            meta = {"scenario": "simulate", "policy": policy, "design": design,
                    "kappa": _fmt(knob), "sigma0": _fmt(cfg.instance.noise_scale)}
            _write_tail_csv(out / "tail.csv", _tail_rows(reports, meta, extras["tail_functional"]))
    except OSError as exc:
        # leave a marker so a partially written results.csv is never mistaken
        # for a completed run
        try:
            (out / "PARTIAL_OUTPUT").write_text(f"aborted: {exc}\n")
        except OSError:
            pass
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 3
    return 0


def build_table_policy(label: str, kappa: float, n_arms: int, horizon: int) -> PolicySpec:
    """Policy descriptors for the benchmark grid.

    The any-time column uses eta = K * kappa**2: the published sweep labels
    the anytime policy by the per-arm-normalized knob, absorbing the built-in
    1/sqrt(K) rescaling of its radius (the other columns use eta = kappa**2).
    """
    if label == "SE":
        return PolicySpec("se", bonus=BonusSchedule.from_kappa("standard", kappa, horizon=horizon))
    if label == "UCB":
        return PolicySpec("ucb", bonus=BonusSchedule.from_kappa("standard", kappa, horizon=horizon))
    if label == "TS":
        return PolicySpec("ts", kappa=kappa)
    if label == "SE_new":
        return PolicySpec("se", bonus=BonusSchedule.from_kappa("new_sqrt_t", kappa, horizon=horizon))
    if label == "UCB_new":
        return PolicySpec("ucb", bonus=BonusSchedule.from_kappa("new_sqrt_t", kappa, horizon=horizon))
    if label == "UCB_any":
        return PolicySpec(
            "ucb",
            bonus=BonusSchedule("any_time", sigma=1.0, eta=n_arms * kappa**2, n_arms=n_arms),
        )
    raise ValueError(f"unknown table policy {label!r}")


def cmd_reproduce(args) -> int:
    target = args.target
    table_key = "table1" if target in ("table1", "fig1") else "table2"
    means = TABLE_MEANS[table_key]
    n_arms = len(means)
    reps = args.replications if args.replications is not None else TABLE_REPLICATIONS
    if reps < 1:
        print("error: replications: must be >= 1", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    workers = _resolve_workers(args)
    instance = BanditInstance(means=means, noise_scale=1.0, horizon=TABLE_HORIZON)
    out = Path(args.out)
    want_hists = target in ("fig1", "fig2")
    try:
        out.mkdir(parents=True, exist_ok=True)
        table_rows = []
        for label in TABLE_POLICIES:
            row = [label]
            for kappa in TABLE_KAPPAS:
                spec = build_table_policy(label, kappa, n_arms, TABLE_HORIZON)
                cfg = RunConfig(instance=instance, policy=spec,
                                replications=reps, master_seed=seed)
                results = list(stream_monte_carlo(cfg, workers=workers))
                rewards = [r.cumulative_reward for r in results]
                row.append(_fmt(math.fsum(rewards) / len(rewards)))
                if want_hists:
                    counts, edges = histogram(rewards, bins=args.bins)
                    hist_path = out / f"hist_{label}_{kappa:g}.csv"
                    with hist_path.open("w", newline="") as fh:
                        w = csv.writer(fh)
                        w.writerow(["bin_left", "bin_right", "count"])
                        for j in range(len(counts)):
                            w.writerow([_fmt(edges[j]), _fmt(edges[j + 1]), int(counts[j])])
            table_rows.append(row)
        with (out / f"{table_key}.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["policy"] + [f"kappa={k:g}" for k in TABLE_KAPPAS])
            w.writerows(table_rows)
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 3
    return 0


_BOUND_ALIASES = {
    "thmk": "thm_k",
    "thmkopt": "thm_k_opt",
    "thmanytime": "thm_any_time",
    "thmlinear": "thm_linear",
    "neatform": "neat_form",
}


def _normalize_bound(name: str) -> str | None:
    return _BOUND_ALIASES.get(name.lower().replace("_", "").replace("-", ""))


def cmd_bounds(args) -> int:
    name = _normalize_bound(args.bound)
    if name is None:
        print(f"error: unknown bound name {args.bound!r}", file=sys.stderr)
        return 2
    if args.x is not None and len(args.x) > 0:
        grid = [float(v) for v in args.x]
    else:
        grid = list(np.linspace(args.x_min, args.x_max, args.x_count))
    try:
        if name == "thm_k":
            fn = lambda x: (bound_k_armed(x, args.arms, args.horizon, args.sigma, args.eta), None)
        elif name == "thm_k_opt":
            fn = lambda x: (
                bound_k_armed_optimal(x, args.arms, args.horizon, args.sigma, args.eta1, args.eta2),
                None,
            )
        elif name == "thm_any_time":
            fn = lambda x: (bound_anytime(x, args.arms, args.horizon, args.sigma, args.eta), None)
        elif name == "thm_linear":
            fn = lambda x: (bound_linear(x, args.dim, args.horizon, args.sigma, args.eta), None)
        else:
            variant = args.variant
            fn = lambda x: neat_form_bound(x, args.arms, args.horizon, args.sigma, args.eta, variant)
        rows = []
        for x in grid:
            raw, y = fn(float(x))
            rows.append((x, raw, min(1.0, raw), y))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with (out / "bounds.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "raw", "clamped", "y"])
            for x, raw, clamped, y in rows:
                w.writerow([_fmt(x), _fmt(raw), _fmt(clamped), "" if y is None else _fmt(y)])
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 3
    return 0


def cmd_fragility(args) -> int:
    reps = args.replications if args.replications is not None else TABLE_REPLICATIONS
    if reps < 1:
        print("error: replications: must be >= 1", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    workers = _resolve_workers(args)
    horizon = TABLE_HORIZON
    threshold = horizon / 4.0

    # (scenario, kind, design-or-None, kappa, sigma0)
    runs = [
        ("standard_vs_new", "ucb", "standard", 0.1, 1.0),
        ("standard_vs_new", "ucb", "new_sqrt_t", 0.1, 1.0),
        ("standard_vs_new", "se", "standard", 0.1, 1.0),
        ("standard_vs_new", "se", "new_sqrt_t", 0.1, 1.0),
        ("ts_misspecified", "ts", None, 0.2, 1.0),
        ("ts_misspecified", "ts", None, 0.2, 2.0),
    ]
    rows = []
    try:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for scenario, kind, design, kappa, sigma0 in runs:
            instance = BanditInstance(
                means=FRAGILITY_MEANS, noise_scale=sigma0, horizon=horizon
            )
            if kind == "ts":
                spec = PolicySpec("ts", kappa=kappa)
            else:
                spec = PolicySpec(
                    kind, bonus=BonusSchedule.from_kappa(design, kappa, horizon=horizon)
                )
            cfg = RunConfig(instance=instance, policy=spec,
                            replications=reps, master_seed=seed)
            results = list(stream_monte_carlo(cfg, workers=workers))
            bound = bound_for(spec, instance)
            reports = empirical_tail(
                results,
                [threshold],
                functional="pseudo",
                bound_name=None if bound is None else bound[0],
                bound_fn=None if bound is None else bound[1],
            )
            meta = {"scenario": scenario, "policy": kind,
                    "design": design or "", "kappa": _fmt(kappa),
                    "sigma0": _fmt(sigma0)}
            rows.extend(_tail_rows(reports, meta, "pseudo"))
        _write_tail_csv(out / "tail.csv", rows)
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 3
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="master seed (default 20240)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: BANDIT_WORKERS or 1)")
    p.add_argument("--replications", type=int, default=None,
                   help="override the replication count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditlab",
        description="Monte Carlo experiments for bandit policies with light-tailed regret risk",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a config-described experiment")
    p_sim.add_argument("--config", required=True, help="JSON config path")
    _add_common(p_sim)
    p_sim.set_defaults(fn=cmd_simulate)

    p_rep = sub.add_parser("reproduce", help="reproduce a benchmark table or figure dataset")
    p_rep.add_argument("target", choices=["table1", "table2", "fig1", "fig2"])
    p_rep.add_argument("--bins", type=int, default=50, help="histogram bins (figure targets)")
    _add_common(p_rep)
    p_rep.set_defaults(fn=cmd_reproduce)

    p_bnd = sub.add_parser("bounds", help="evaluate a closed-form tail bound on a grid")
    p_bnd.add_argument("--bound", required=True,
                       help="thm_k | thm_k_opt | thm_any_time | thm_linear | neat_form")
    p_bnd.add_argument("--arms", type=int, default=2)
    p_bnd.add_argument("--horizon", type=int, default=500)
    p_bnd.add_argument("--sigma", type=float, default=1.0)
    p_bnd.add_argument("--eta", type=float, default=4.0)
    p_bnd.add_argument("--eta1", type=float, default=4.0)
    p_bnd.add_argument("--eta2", type=float, default=4.0)
    p_bnd.add_argument("--dim", type=int, default=4)
    p_bnd.add_argument("--variant", choices=["thm_k", "thm_k_opt"], default="thm_k")
    p_bnd.add_argument("--x", action="append", default=None, type=float,
                       help="explicit grid point (repeatable)")
    p_bnd.add_argument("--x-min", type=float, default=0.0)
    p_bnd.add_argument("--x-max", type=float, default=500.0)
    p_bnd.add_argument("--x-count", type=int, default=50)
    p_bnd.add_argument("--out", required=True)
    p_bnd.set_defaults(fn=cmd_bounds)

    p_fra = sub.add_parser("fragility", help="small-eta and misspecification demonstrations")
    _add_common(p_fra)
    p_fra.set_defaults(fn=cmd_fragility)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


def console_main() -> None:
    sys.exit(main())
