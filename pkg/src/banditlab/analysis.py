"""Turn raw episode results into summary tables, tail-exceedance estimates
with Wilson intervals, and closed-form tail-bound values for comparison.

The bound evaluators return the raw formula value, which legitimately exceeds
one at small thresholds; comparisons should use the clamped companion
min(1, raw). Factors that can overflow a double, such as the (T/d)^(2d+1)
multiplier of the linear bound, are assembled in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import EpisodeResult

__all__ = [
    "BOUND_NAMES",
    "TailReport",
    "wilson_interval",
    "summarize",
    "empirical_tail",
    "bound_k_armed",
    "bound_k_armed_optimal",
    "bound_anytime",
    "bound_linear",
    "neat_form_bound",
    "histogram",
]

BOUND_NAMES = ("thm_k", "thm_k_opt", "thm_any_time", "thm_linear", "neat_form")
QUANTILE_LEVELS = (1, 5, 25, 50, 75, 95, 99)

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class TailReport:
    """One threshold's empirical exceedance next to a theorem-bound value."""

    threshold: float
    empirical_prob: float
    ci_low: float
    ci_high: float
    bound_name: str | None = None
    bound_value: float | None = None
    bound_clamped: float | None = None


def wilson_interval(
    successes: int, trials: int, z: float = _Z95
) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Never escapes [0, 1] and stays sane at 0 or n successes, unlike the
    normal approximation.
    """
    if trials <= 0:
        raise ValueError("trials: must be >= 1")
    if not (0 <= successes <= trials):
        raise ValueError("successes: must lie in [0, trials]")
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    margin = (z / denom) * math.sqrt(
        p_hat * (1 - p_hat) / trials + z * z / (4 * trials * trials)
    )
    # at the boundaries the exact endpoints are 0 and 1; avoid round-off just
    # inside them so the interval always brackets the point estimate
    lo = 0.0 if successes == 0 else max(0.0, center - margin)
    hi = 1.0 if successes == trials else min(1.0, center + margin)
    return lo, hi


def _values(results: Sequence[EpisodeResult], functional: str) -> np.ndarray:
    if functional == "pseudo":
        return np.array([r.pseudo_regret for r in results])
    if functional == "empirical":
        return np.array([r.empirical_regret for r in results])
    if functional == "reward":
        return np.array([r.cumulative_reward for r in results])
    raise ValueError(f"functional: unknown functional {functional!r}")


def summarize(results: Sequence[EpisodeResult]) -> dict:
    """Sample statistics of cumulative reward plus the mean pseudo regret.

    Quantiles use linear interpolation (numpy's default, type 7). Means use
    compensated summation so they do not depend on accumulation order.
    """
    if len(results) == 0:
        raise ValueError("results: need at least one episode")
    rewards = _values(results, "reward")
    pseudo = _values(results, "pseudo")
    qs = np.quantile(rewards, [q / 100 for q in QUANTILE_LEVELS])
    return {
        "n_paths": len(results),
        "mean_reward": math.fsum(rewards) / len(rewards),
        "mean_pseudo_regret": math.fsum(pseudo) / len(pseudo),
        "std_reward": float(np.std(rewards, ddof=1)) if len(rewards) > 1 else 0.0,
        "quantiles": {f"q{q}": float(v) for q, v in zip(QUANTILE_LEVELS, qs)},
    }


def empirical_tail(
    results: Sequence[EpisodeResult],
    thresholds: Iterable[float],
    functional: str = "pseudo",
    bound_name: str | None = None,
    bound_fn: Callable[[float], float] | None = None,
) -> list[TailReport]:
    """Exceedance frequency P(functional >= x) per threshold, with Wilson CI.

    When a bound evaluator is supplied its raw and clamped values are attached
    to each report.
    """
    thresholds = list(thresholds)
    if not thresholds:
        raise ValueError("thresholds: must be non-empty")
    vals = _values(results, functional)
    n = len(vals)
    reports = []
    for x in thresholds:
        hits = int(np.count_nonzero(vals >= x))
        lo, hi = wilson_interval(hits, n)
        raw = clamped = None
        if bound_fn is not None:
            raw = float(bound_fn(float(x)))
            clamped = min(1.0, raw)
        reports.append(
            TailReport(
                threshold=float(x),
                empirical_prob=hits / n,
                ci_low=lo,
                ci_high=hi,
                bound_name=bound_name,
                bound_value=raw,
                bound_clamped=clamped,
            )
        )
    return reports


def _pos(v):
    return np.maximum(v, 0.0)


def bound_k_armed(x, n_arms: int, horizon: int, sigma: float, eta: float):
    """Tail bound for the sqrt(T)-inflated bonus on K arms at threshold x."""
    x = np.asarray(x, dtype=float)
    k, t = n_arms, horizon
    ln_t = math.log(t)
    term1 = np.exp(-(x**2) / (2 * k * sigma**2 * t))
    shift = 2 * k + 4 * k * sigma * math.sqrt(eta * t * ln_t)
    term2 = 2 * k * np.exp(-_pos(x - shift) ** 2 / (32 * sigma**2 * k**2 * t))
    term3 = k**2 * t * np.exp(-x * math.sqrt(eta * ln_t) / (8 * sigma * k * math.sqrt(t)))
    out = term1 + term2 + term3
    return float(out) if out.ndim == 0 else out


def bound_k_armed_optimal(
    x, n_arms: int, horizon: int, sigma: float, eta1: float, eta2: float
):
    """Tail bound for the K-rescaled two-branch bonus at threshold x."""
    x = np.asarray(x, dtype=float)
    k, t = n_arms, horizon
    ln_t = math.log(t)
    term1 = np.exp(-(x**2) / (8 * k * sigma**2 * t))
    shift = 2 * k + 8 * sigma * math.sqrt(max(eta1, eta2) * k * t * ln_t)
    term2 = 4 * k * np.exp(-_pos(x - shift) ** 2 / (128 * sigma**2 * k * t))
    term3 = (
        2
        * k**2
        * t
        * np.exp(
            -_pos(x - 2 * k) * math.sqrt(eta1 * ln_t) / (16 * sigma * math.sqrt(k * t))
        )
    )
    out = term1 + term2 + term3
    return float(out) if out.ndim == 0 else out


def bound_anytime(x, n_arms: int, horizon: int, sigma: float, eta: float):
    """Tail bound for the horizon-free bonus, evaluated at horizon T."""
    x = np.asarray(x, dtype=float)
    k, t = n_arms, horizon
    ln_t = math.log(t)
    term1 = np.exp(-(x**2) / (8 * k * sigma**2 * t))
    shift = 2 * k + 16 * sigma * math.sqrt(2 * eta * k * t * ln_t)
    term2 = 2 * k * t**2 * np.exp(-_pos(x - shift) ** 2 / (512 * sigma**2 * k * t))
    term3 = (
        2
        * k
        * t**3
        * np.exp(
            -_pos(x - 2 * k) * math.sqrt(eta * ln_t) / (16 * sigma * math.sqrt(k * t))
        )
    )
    out = term1 + term2 + term3
    return float(out) if out.ndim == 0 else out


def bound_linear(x, dim: int, horizon: int, sigma: float, eta: float):
    """Tail bound for the ridge-based linear policy at threshold x.

    The 2d(T/d)^(2d+1) multiplier is kept in log space; the result may still
    be astronomically large (and is then clamped by callers), but never
    overflows silently mid-formula.
    """
    if horizon < dim:
        raise ValueError("bound_linear: needs T >= d")
    x = np.asarray(x, dtype=float)
    d, t = dim, horizon
    ln_t = math.log(t)
    term1 = np.exp(-(x**2) / (2 * sigma**2 * d**2 * t))
    log_factor = math.log(2 * d) + (2 * d + 1) * (math.log(t) - math.log(d))
    shift = (
        4 * math.sqrt(d)
        + 32 * d * math.sqrt(t) * ln_t
        + 16 * sigma * math.sqrt(eta * d * t) * ln_t
    )
    expo2 = _pos(x - shift) ** 2 / (512 * sigma**2 * d * t * ln_t**2)
    expo3 = (
        _pos(x - 4 * math.sqrt(d))
        * math.sqrt(eta)
        / (8 * sigma * math.sqrt(d * t) * ln_t)
    )
    with np.errstate(over="ignore"):
        term2 = np.exp(log_factor - expo2)
        term3 = np.exp(log_factor - expo3)
    out = term1 + term2 + term3
    return float(out) if out.ndim == 0 else out


def neat_form_bound(
    x, n_arms: int, horizon: int, sigma: float, eta: float, variant: str = "thm_k"
):
    """Single-exponential rewriting of the K-armed bounds.

    Returns (value, y) where y is the shifted-and-scaled threshold; the bound
    is c*K * exp(-min(y^2, y*sqrt(eta ln T))) with c = 4 for the plain
    variant and c = 8 for the K-rescaled one.
    """
    x = np.asarray(x, dtype=float)
    k, t = n_arms, horizon
    ln_t = math.log(t)
    eta_sym = max(eta, 1.0 / eta)
    if variant == "thm_k":
        shift = 2 * k + 16 * sigma * k * math.sqrt(eta_sym * t * ln_t)
        scale = 8 * sigma * k * math.sqrt(t)
        lead = 4 * k
    elif variant == "thm_k_opt":
        shift = 2 * k + 32 * sigma * math.sqrt(eta_sym * k * t * ln_t)
        scale = 16 * sigma * math.sqrt(k * t)
        lead = 8 * k
    else:
        raise ValueError(f"variant: unknown neat-form variant {variant!r}")
    y = _pos(x - shift) / scale
    value = lead * np.exp(-np.minimum(y**2, y * math.sqrt(eta * ln_t)))
    if value.ndim == 0:
        return float(value), float(y)
    return value, y


def histogram(values: Sequence[float], bins: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width histogram over [min, max]; returns (counts, edges)."""
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        raise ValueError("values: need at least one sample")
    return np.histogram(vals, bins=bins)
