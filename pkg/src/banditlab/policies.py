"""Decision rules: successive elimination, UCB, Thompson sampling,
explore-then-commit, linear UCB, and a uniform-random linear baseline.

Each policy is a small mutable state object with ``select(t)`` and
``update(arm, reward)`` (time indices are 1-based). These are the sequential
reference implementations; the simulator's batch kernels replicate their
semantics exactly and are cross-checked in the test suite.

Tie-breaking is lowest index / first occurrence everywhere, which makes
zero-noise traces deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bonus import BonusSchedule

__all__ = [
    "PolicySpec",
    "SEPolicy",
    "UCBPolicy",
    "TSPolicy",
    "ETCPolicy",
    "LinUCBPolicy",
    "LinRandomPolicy",
    "make_policy",
    "default_etc_budget",
]

POLICY_KINDS = ("se", "ucb", "ts", "etc", "linucb", "linrandom")


def default_etc_budget(horizon: int, n_arms: int) -> int:
    """Per-arm exploration budget ceil(T^(2/3) / K)."""
    return math.ceil(horizon ** (2.0 / 3.0) / n_arms)


@dataclass(frozen=True)
class PolicySpec:
    """Serializable policy descriptor used by configs and the simulator."""

    kind: str
    bonus: BonusSchedule | None = None  # se, ucb, linucb
    kappa: float | None = None  # ts
    explore_budget: int | None = None  # etc; None = default rate
    reinvert_every: int = 256  # linucb V^-1 refresh cadence

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"kind: unknown policy kind {self.kind!r}")
        if self.kind in ("se", "ucb", "linucb") and self.bonus is None:
            raise ValueError(f"{self.kind}: needs a bonus schedule")
        if self.kind == "linucb" and self.bonus.design != "linear":
            raise ValueError("linucb: bonus design must be 'linear'")
        if self.kind in ("se", "ucb") and self.bonus.design == "linear":
            raise ValueError(f"{self.kind}: bonus design cannot be 'linear'")
        if self.kind == "ts" and (self.kappa is None or not (self.kappa > 0)):
            raise ValueError("ts: needs kappa > 0")
        if self.explore_budget is not None and self.explore_budget < 0:
            raise ValueError("etc: explore_budget must be >= 0")
        if self.reinvert_every < 1:
            raise ValueError("linucb: reinvert_every must be >= 1")

    @property
    def label(self) -> str:
        if self.kind in ("se", "ucb"):
            return f"{self.kind}/{self.bonus.design}"
        return self.kind


class UCBPolicy:
    """Pull the arm with the highest mean estimate plus radius.

    Unpulled arms have infinite radius, so the first K rounds sweep the arms
    in index order.
    """

    def __init__(self, schedule: BonusSchedule, n_arms: int):
        self.schedule = schedule
        self.n_arms = n_arms
        self.counts = np.zeros(n_arms, dtype=np.int64)
        self.sums = np.zeros(n_arms)

    def means(self) -> np.ndarray:
        return np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), 0.0)

    def select(self, t: int) -> int:
        scores = self.means() + self.schedule.rad(self.counts, t=t)
        return int(np.argmax(scores))

    def update(self, arm: int, reward: float) -> None:
        self.counts[arm] += 1
        self.sums[arm] += reward


class SEPolicy:
    """Phased elimination: sweep every active arm once, then drop any arm
    whose upper confidence value falls strictly below another active arm's
    lower confidence value.

    Eliminations use the snapshot of estimates at the end of a full sweep; a
    sweep cut short by the horizon never triggers one. The arm with maximal
    upper value can never be dominated, so the active set stays non-empty.
    """

    def __init__(self, schedule: BonusSchedule, n_arms: int):
        self.schedule = schedule
        self.n_arms = n_arms
        self.counts = np.zeros(n_arms, dtype=np.int64)
        self.sums = np.zeros(n_arms)
        self.active = np.ones(n_arms, dtype=bool)
        self.cursor = 0  # arms already pulled in the current sweep

    def means(self) -> np.ndarray:
        return np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), 0.0)

    def select(self, t: int) -> int:
        active_idx = np.flatnonzero(self.active)
        return int(active_idx[self.cursor])

    def update(self, arm: int, reward: float) -> None:
        self.counts[arm] += 1
        self.sums[arm] += reward
        self.cursor += 1
        if self.cursor == int(self.active.sum()):
            self.eliminate(t=int(self.counts.sum()))
            self.cursor = 0

    def eliminate(self, t: int) -> None:
        rad = self.schedule.rad(self.counts, t=t)
        means = self.means()
        upper = means + rad
        lower = means - rad
        best_lower = lower[self.active].max()
        dominated = self.active & (upper < best_lower)
        self.active &= ~dominated


class TSPolicy:
    """Gaussian Thompson sampling with a standard normal prior on each mean
    and an assumed observation variance of kappa**2.

    The conjugate posterior after n observations summing to S is
    N(S / (kappa^2 + n), kappa^2 / (kappa^2 + n)). One posterior sample per
    arm is drawn each round from the policy stream, K draws in arm order.
    """

    def __init__(self, kappa: float, n_arms: int, rng: np.random.Generator):
        self.kappa_sq = kappa * kappa
        self.n_arms = n_arms
        self.rng = rng
        self.counts = np.zeros(n_arms, dtype=np.int64)
        self.sums = np.zeros(n_arms)

    def posterior(self) -> tuple[np.ndarray, np.ndarray]:
        denom = self.kappa_sq + self.counts
        return self.sums / denom, self.kappa_sq / denom

    def select(self, t: int) -> int:
        mean, var = self.posterior()
        draws = mean + np.sqrt(var) * self.rng.standard_normal(self.n_arms)
        return int(np.argmax(draws))

    def update(self, arm: int, reward: float) -> None:
        self.counts[arm] += 1
        self.sums[arm] += reward


class ETCPolicy:
    """Round-robin for m pulls per arm, then commit to the best estimate."""

    def __init__(self, explore_budget: int, n_arms: int):
        self.m = explore_budget
        self.n_arms = n_arms
        self.counts = np.zeros(n_arms, dtype=np.int64)
        self.sums = np.zeros(n_arms)
        self.committed: int | None = None

    def means(self) -> np.ndarray:
        return np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), 0.0)

    def select(self, t: int) -> int:
        if t <= self.m * self.n_arms:
            return (t - 1) % self.n_arms
        if self.committed is None:
            self.committed = int(np.argmax(self.means()))
        return self.committed

    def update(self, arm: int, reward: float) -> None:
        self.counts[arm] += 1
        self.sums[arm] += reward


class LinUCBPolicy:
    """Ridge-based UCB over a finite action set.

    Maintains V = I + sum a a', its inverse via rank-one (Sherman-Morrison)
    updates with a periodic full re-inversion to bound drift, and the ridge
    estimate theta_hat = V^-1 b. Selection maximizes
    theta_hat' a + rad_t(a' V^-1 a) by exhaustive enumeration.
    """

    def __init__(self, schedule: BonusSchedule, dim: int, reinvert_every: int = 256):
        self.schedule = schedule
        self.dim = dim
        self.reinvert_every = reinvert_every
        self.V = np.eye(dim)
        self.V_inv = np.eye(dim)
        self.b = np.zeros(dim)
        self.theta_hat = np.zeros(dim)
        self.updates = 0
        self.potential = 0.0  # running sum of a' V^-1 a at selection time

    def scores(self, action_set: np.ndarray, t: int) -> np.ndarray:
        z = np.einsum("ad,de,ae->a", action_set, self.V_inv, action_set)
        z = np.maximum(z, 0.0)  # guard sub-ulp negatives from the rank-one updates
        return np.einsum("ad,d->a", action_set, self.theta_hat) + self.schedule.rad_z(
            z, t
        )

    def select(self, action_set: np.ndarray, t: int) -> int:
        action_set = np.asarray(action_set, dtype=float)
        if action_set.ndim != 2 or action_set.shape[0] == 0:
            raise ValueError("action_set: need a non-empty list of d-vectors")
        return int(np.argmax(self.scores(action_set, t)))

    def update(self, action: np.ndarray, reward: float) -> None:
        a = np.asarray(action, dtype=float)
        self.potential += max(float(np.einsum("d,de,e->", a, self.V_inv, a)), 0.0)
        self.V += np.einsum("d,e->de", a, a)
        self.b += reward * a
        u = np.einsum("de,e->d", self.V_inv, a)
        denom = 1.0 + float(np.einsum("d,d->", a, u))
        self.V_inv -= np.einsum("d,e->de", u, u) / denom
        self.updates += 1
        if self.updates % self.reinvert_every == 0:
            self.V_inv = np.linalg.inv(self.V)
        self.theta_hat = np.einsum("de,e->d", self.V_inv, self.b)


class LinRandomPolicy:
    """Uniform-random action baseline for the linear setting."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def select(self, action_set: np.ndarray, t: int) -> int:
        return int(self.rng.integers(0, action_set.shape[0]))

    def update(self, action: np.ndarray, reward: float) -> None:
        pass


def make_policy(
    spec: PolicySpec,
    n_arms: int,
    horizon: int,
    policy_rng: np.random.Generator,
    dim: int | None = None,
):
    """Instantiate the state object for one episode."""
    if spec.kind == "se":
        return SEPolicy(spec.bonus, n_arms)
    if spec.kind == "ucb":
        return UCBPolicy(spec.bonus, n_arms)
    if spec.kind == "ts":
        return TSPolicy(spec.kappa, n_arms, policy_rng)
    if spec.kind == "etc":
        m = spec.explore_budget
        if m is None:
            m = default_etc_budget(horizon, n_arms)
        return ETCPolicy(m, n_arms)
    if spec.kind == "linucb":
        return LinUCBPolicy(spec.bonus, dim, spec.reinvert_every)
    if spec.kind == "linrandom":
        return LinRandomPolicy(policy_rng)
    raise ValueError(f"unknown policy kind {spec.kind!r}")
