"""Domain types and exact regret accounting shared by every other module.

Arms and actions are 0-indexed throughout the package. All value types are
frozen after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "BanditInstance",
    "LinearInstance",
    "EpisodeResult",
    "RunConfig",
    "pseudo_regret",
    "decompose_regret",
]


@dataclass(frozen=True)
class BanditInstance:
    """A K-armed environment: mean vector, true noise scale and horizon.

    ``noise_scale`` is the environment's real deviation (sigma0), which a
    policy's assumed deviation may deliberately mismatch. Zero noise is legal
    and used for deterministic golden-trace tests.
    """

    means: tuple[float, ...]
    noise_scale: float
    horizon: int

    def __post_init__(self):
        means = tuple(float(m) for m in self.means)
        object.__setattr__(self, "means", means)
        k = len(means)
        if k < 2:
            raise ValueError(f"means: need at least 2 arms, got {k}")
        if any(not (0.0 <= m <= 1.0) for m in means):
            raise ValueError("means: every mean must lie in [0, 1]")
        if not (self.noise_scale >= 0.0):
            raise ValueError("noise_scale: must be >= 0")
        if self.horizon < 3 or self.horizon < k:
            raise ValueError(
                f"horizon: need T >= max(3, K); got T={self.horizon}, K={k}"
            )

    @property
    def n_arms(self) -> int:
        return len(self.means)

    @property
    def best_mean(self) -> float:
        return max(self.means)

    def gaps(self) -> np.ndarray:
        """Per-arm gap to the best mean, derived on demand (never stored)."""
        m = np.asarray(self.means)
        return m.max() - m


@dataclass(frozen=True)
class LinearInstance:
    """A linear environment: unknown parameter, action-set scheme, horizon.

    ``n_actions`` actions are drawn uniformly on the unit sphere per episode
    (``action_scheme="fixed"`` reuses one set for all rounds, ``"per_round"``
    redraws each round).
    """

    theta: tuple[float, ...]
    n_actions: int
    noise_scale: float
    horizon: int
    action_scheme: str = "fixed"

    def __post_init__(self):
        theta = tuple(float(v) for v in self.theta)
        object.__setattr__(self, "theta", theta)
        if len(theta) < 1:
            raise ValueError("theta: must be non-empty")
        if max(abs(v) for v in theta) > 1.0 + 1e-12:
            raise ValueError("theta: sup-norm must be <= 1")
        if self.n_actions < 1:
            raise ValueError("n_actions: must be >= 1")
        if not (self.noise_scale >= 0.0):
            raise ValueError("noise_scale: must be >= 0")
        if self.horizon < len(theta):
            raise ValueError(
                f"horizon: need T >= d; got T={self.horizon}, d={len(theta)}"
            )
        if self.action_scheme not in ("fixed", "per_round"):
            raise ValueError(f"action_scheme: unknown scheme {self.action_scheme!r}")

    @property
    def dim(self) -> int:
        return len(self.theta)


@dataclass(frozen=True)
class EpisodeResult:
    """Per-path outcome: pull counts and the exact regret decomposition.

    ``empirical_regret`` is the best achievable mean total minus the realized
    cumulative reward; it equals ``pseudo_regret - noise_sum`` up to float
    round-off of at most 1e-9 * T.
    """

    pulls: np.ndarray
    pseudo_regret: float
    noise_sum: float
    empirical_regret: float
    cumulative_reward: float
    arm_sequence: np.ndarray | None = None
    lin_potential: float | None = None  # sum of a' V^-1 a, LinUCB episodes only

    def __post_init__(self):
        pulls = np.asarray(self.pulls, dtype=np.int64)
        object.__setattr__(self, "pulls", pulls)
        if (pulls < 0).any():
            raise ValueError("pulls: counts must be non-negative")


@dataclass(frozen=True)
class RunConfig:
    """A complete Monte Carlo experiment description."""

    instance: BanditInstance | LinearInstance
    policy: "PolicySpec"
    replications: int
    master_seed: int
    record_trace: bool = False

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications: must be >= 1")
        if not (0 <= self.master_seed < 2**64):
            raise ValueError("master_seed: must fit in an unsigned 64-bit integer")


def pseudo_regret(pulls: Sequence[int] | np.ndarray, means: Sequence[float]) -> float:
    """Sum of pull counts weighted by the gap to the best mean.

    Zero exactly when every pull landed on an arm attaining the best mean.
    """
    pulls = np.asarray(pulls, dtype=np.int64)
    means = np.asarray(means, dtype=float)
    if pulls.shape != means.shape:
        raise ValueError(
            f"pulls and means must have matching lengths; got {pulls.shape} vs {means.shape}"
        )
    return float(np.dot(pulls, means.max() - means))


def decompose_regret(
    trace: Sequence[tuple[int, float]], instance: BanditInstance
) -> EpisodeResult:
    """Recover the full regret decomposition from a per-step (arm, reward) trace.

    The per-step noise is the observed reward minus the pulled arm's mean, so
    the identity "empirical regret = pseudo regret - summed noise" holds by
    construction up to float round-off.
    """
    t_len = len(trace)
    if t_len != instance.horizon:
        raise ValueError(
            f"trace length {t_len} does not match horizon {instance.horizon}"
        )
    k = instance.n_arms
    arms = np.fromiter((a for a, _ in trace), dtype=np.int64, count=t_len)
    rewards = np.fromiter((r for _, r in trace), dtype=float, count=t_len)
    if ((arms < 0) | (arms >= k)).any():
        raise ValueError("trace: arm index out of range")
    pulls = np.bincount(arms, minlength=k)
    means = np.asarray(instance.means)
    noise = float(np.sum(rewards - means[arms]))
    cumulative = float(rewards.sum())
    best_total = instance.best_mean * instance.horizon
    return EpisodeResult(
        pulls=pulls,
        pseudo_regret=pseudo_regret(pulls, instance.means),
        noise_sum=noise,
        empirical_regret=best_total - cumulative,
        cumulative_reward=cumulative,
        arm_sequence=arms,
    )