"""Reward generation with seeded, per-path random streams.

Every simulation path owns independent sub-streams derived from
(master_seed, path index, role) through numpy's splittable SeedSequence:

* role 0 - environment noise, one standard-normal draw per round,
* role 1 - the policy's internal randomness (posterior samples, random picks),
* role 2 - action-set generation for linear instances.

Separating the streams means changing a policy's internal randomness never
perturbs the reward noise attached to a (path, round) pair, which is what
makes common-random-number comparisons across policies valid.
"""

from __future__ import annotations

import numpy as np

from .core import BanditInstance, LinearInstance

__all__ = [
    "ROLE_ENV",
    "ROLE_POLICY",
    "ROLE_ACTIONS",
    "path_stream",
    "sample_reward_mab",
    "sample_reward_linear",
    "make_action_set",
]

ROLE_ENV = 0
ROLE_POLICY = 1
ROLE_ACTIONS = 2


def path_stream(master_seed: int, path: int, role: int) -> np.random.Generator:
    """The (path, role) sub-stream: distinct entropy tuples never collide."""
    if not (0 <= master_seed < 2**64):
        raise ValueError("master_seed: must fit in an unsigned 64-bit integer")
    if path < 0:
        raise ValueError("path: must be non-negative")
    seq = np.random.SeedSequence(entropy=(master_seed, path, role))
    return np.random.Generator(np.random.PCG64(seq))


def sample_reward_mab(
    instance: BanditInstance, arm: int, rng: np.random.Generator
) -> float:
    """One reward draw for the pulled arm: mean plus scaled Gaussian noise.

    Consumes exactly one standard normal from ``rng`` even at zero noise
    scale, so the stream position depends only on the round index.
    """
    if not (0 <= arm < instance.n_arms):
        raise ValueError(f"arm: index {arm} out of range for K={instance.n_arms}")
    return instance.means[arm] + instance.noise_scale * rng.standard_normal()


def sample_reward_linear(
    instance: LinearInstance, action: np.ndarray, rng: np.random.Generator
) -> float:
    """One reward draw for the chosen action vector."""
    action = np.asarray(action, dtype=float)
    if float(np.linalg.norm(action)) > 1.0 + 1e-12:
        raise ValueError("action: Euclidean norm must be <= 1")
    mean = float(np.einsum("d,d->", np.asarray(instance.theta), action))
    return mean + instance.noise_scale * rng.standard_normal()


def make_action_set(dim: int, n_actions: int, rng: np.random.Generator) -> np.ndarray:
    """n_actions i.i.d. uniform points on the unit sphere (rows of the result)."""
    if dim < 1 or n_actions < 1:
        raise ValueError("make_action_set: need dim >= 1 and n_actions >= 1")
    raw = rng.standard_normal((n_actions, dim))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    return raw / norms
