"""Monte Carlo engine: run one episode or stream many in parallel.

Paths are embarrassingly parallel. Each path's randomness comes only from its
own (master_seed, path, role) streams, so results are a pure function of
(config, master_seed): any block partition, worker count, or scheduling order
produces identical per-path output, reassembled in path order.

For throughput, blocks of paths are simulated together by vectorized kernels
whose per-step arithmetic mirrors the reference policy classes operation for
operation; the test suite checks that equivalence path by path.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Iterator

import numpy as np

from .core import BanditInstance, EpisodeResult, LinearInstance, RunConfig
from .environments import (
    ROLE_ACTIONS,
    ROLE_ENV,
    ROLE_POLICY,
    make_action_set,
    path_stream,
)
from .policies import PolicySpec, default_etc_budget

__all__ = ["run_episode", "run_monte_carlo", "stream_monte_carlo", "BLOCK_SIZE"]

BLOCK_SIZE = 2048  # paths simulated together; fixed so block shape never varies


def _env_noise(master_seed: int, paths: np.ndarray, horizon: int) -> np.ndarray:
    """Per-path environment noise: draw i is consumed at round i+1."""
    out = np.empty((len(paths), horizon))
    for i, p in enumerate(paths):
        out[i] = path_stream(master_seed, int(p), ROLE_ENV).standard_normal(horizon)
    return out


def _policy_normals(
    master_seed: int, paths: np.ndarray, horizon: int, n_arms: int
) -> np.ndarray:
    """Per-path posterior-sampling noise, K draws per round in arm order."""
    out = np.empty((len(paths), horizon, n_arms))
    for i, p in enumerate(paths):
        out[i] = path_stream(master_seed, int(p), ROLE_POLICY).standard_normal(
            (horizon, n_arms)
        )
    return out


def _policy_integers(
    master_seed: int, paths: np.ndarray, horizon: int, high: int
) -> np.ndarray:
    out = np.empty((len(paths), horizon), dtype=np.int64)
    for i, p in enumerate(paths):
        out[i] = path_stream(master_seed, int(p), ROLE_POLICY).integers(
            0, high, size=horizon
        )
    return out


def _action_sets(
    master_seed: int, paths: np.ndarray, instance: LinearInstance
) -> np.ndarray:
    """(P, A, d) for the fixed scheme, (P, T, A, d) for per-round sets."""
    d, n_act, t_len = instance.dim, instance.n_actions, instance.horizon
    if instance.action_scheme == "fixed":
        out = np.empty((len(paths), n_act, d))
        for i, p in enumerate(paths):
            rng = path_stream(master_seed, int(p), ROLE_ACTIONS)
            out[i] = make_action_set(d, n_act, rng)
        return out
    out = np.empty((len(paths), t_len, n_act, d))
    for i, p in enumerate(paths):
        rng = path_stream(master_seed, int(p), ROLE_ACTIONS)
        for t in range(t_len):
            out[i, t] = make_action_set(d, n_act, rng)
    return out


def _mab_results(
    instance: BanditInstance,
    counts: np.ndarray,
    cum: np.ndarray,
    noise: np.ndarray,
    trace: np.ndarray | None,
) -> list[EpisodeResult]:
    gaps = instance.gaps()
    best_total = instance.best_mean * instance.horizon
    results = []
    for i in range(counts.shape[0]):
        results.append(
            EpisodeResult(
                pulls=counts[i],
                pseudo_regret=float(np.dot(counts[i], gaps)),
                noise_sum=float(noise[i]),
                empirical_regret=best_total - float(cum[i]),
                cumulative_reward=float(cum[i]),
                arm_sequence=None if trace is None else trace[i].copy(),
            )
        )
    return results


def _run_mab_block(
    instance: BanditInstance,
    spec: PolicySpec,
    master_seed: int,
    paths: np.ndarray,
    record_trace: bool,
) -> list[EpisodeResult]:
    n_paths = len(paths)
    n_arms, t_len = instance.n_arms, instance.horizon
    theta = np.asarray(instance.means)
    sigma0 = instance.noise_scale
    eps = _env_noise(master_seed, paths, t_len)

    counts = np.zeros((n_paths, n_arms), dtype=np.int64)
    sums = np.zeros((n_paths, n_arms))
    cum = np.zeros(n_paths)
    noise = np.zeros(n_paths)
    rows = np.arange(n_paths)
    trace = np.zeros((n_paths, t_len), dtype=np.int16) if record_trace else None

    kind = spec.kind
    schedule = spec.bonus
    rad_table = None
    if kind in ("se", "ucb") and schedule.design != "any_time":
        rad_table = schedule.rad(np.arange(t_len + 1))

    if kind == "se":
        active = np.ones((n_paths, n_arms), dtype=bool)
        cursor = np.zeros(n_paths, dtype=np.int64)
    elif kind == "ts":
        kappa_sq = spec.kappa * spec.kappa
        z_draws = _policy_normals(master_seed, paths, t_len, n_arms)
    elif kind == "etc":
        m = spec.explore_budget
        if m is None:
            m = default_etc_budget(t_len, n_arms)
        committed = None

    for t in range(1, t_len + 1):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
        if kind == "ucb":
            rad = rad_table[counts] if rad_table is not None else schedule.rad(counts, t=t)
            arms = np.argmax(means + rad, axis=1)
        elif kind == "se":
            pos = np.cumsum(active, axis=1) - 1
            arms = np.argmax(active & (pos == cursor[:, None]), axis=1)
        elif kind == "ts":
            denom = kappa_sq + counts
            draws = sums / denom + np.sqrt(kappa_sq / denom) * z_draws[:, t - 1, :]
            arms = np.argmax(draws, axis=1)
        else:  # etc
            if t <= m * n_arms:
                arms = np.full(n_paths, (t - 1) % n_arms, dtype=np.int64)
            else:
                if committed is None:
                    committed = np.argmax(means, axis=1)
                arms = committed

        rewards = theta[arms] + sigma0 * eps[:, t - 1]
        counts[rows, arms] += 1
        sums[rows, arms] += rewards
        cum += rewards
        noise += rewards - theta[arms]
        if trace is not None:
            trace[:, t - 1] = arms

        if kind == "se":
            cursor += 1
            done = cursor == active.sum(axis=1)
            if done.any():
                means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
                rad = (
                    rad_table[counts]
                    if rad_table is not None
                    else schedule.rad(counts, t=t)
                )
                upper = means + rad
                lower = np.where(active, means - rad, -np.inf)
                best_lower = lower.max(axis=1)
                dominated = active & (upper < best_lower[:, None])
                active &= ~(done[:, None] & dominated)
                cursor[done] = 0

    return _mab_results(instance, counts, cum, noise, trace)


def _run_linear_block(
    instance: LinearInstance,
    spec: PolicySpec,
    master_seed: int,
    paths: np.ndarray,
    record_trace: bool,
) -> list[EpisodeResult]:
    n_paths = len(paths)
    d, n_act, t_len = instance.dim, instance.n_actions, instance.horizon
    theta = np.asarray(instance.theta)
    sigma0 = instance.noise_scale
    per_round = instance.action_scheme == "per_round"

    eps = _env_noise(master_seed, paths, t_len)
    acts_all = _action_sets(master_seed, paths, instance)

    counts = np.zeros((n_paths, n_act), dtype=np.int64)
    cum = np.zeros(n_paths)
    noise = np.zeros(n_paths)
    pseudo = np.zeros(n_paths)
    opt_total = np.zeros(n_paths)
    rows = np.arange(n_paths)
    trace = np.zeros((n_paths, t_len), dtype=np.int16) if record_trace else None

    if spec.kind == "linucb":
        schedule = spec.bonus
        v_inv = np.tile(np.eye(d), (n_paths, 1, 1))
        v_mat = np.tile(np.eye(d), (n_paths, 1, 1))
        b_vec = np.zeros((n_paths, d))
        theta_hat = np.zeros((n_paths, d))
        potential = np.zeros(n_paths)
    else:  # linrandom
        pre_idx = _policy_integers(master_seed, paths, t_len, n_act)
        potential = None

    for t in range(1, t_len + 1):
        acts = acts_all[:, t - 1] if per_round else acts_all  # (P, A, d)
        mean_all = np.einsum("rad,d->ra", acts, theta)
        if spec.kind == "linucb":
            z = np.einsum("rad,rde,rae->ra", acts, v_inv, acts)
            z = np.maximum(z, 0.0)
            scores = np.einsum("rad,rd->ra", acts, theta_hat) + schedule.rad_z(z, t)
            idx = np.argmax(scores, axis=1)
        else:
            idx = pre_idx[:, t - 1]
        chosen = acts[rows, idx]  # (P, d)
        mean_chosen = mean_all[rows, idx]
        rewards = mean_chosen + sigma0 * eps[:, t - 1]

        if spec.kind == "linucb":
            potential += np.maximum(
                np.einsum("rd,rde,re->r", chosen, v_inv, chosen), 0.0
            )
            v_mat += np.einsum("rd,re->rde", chosen, chosen)
            b_vec += rewards[:, None] * chosen
            u = np.einsum("rde,re->rd", v_inv, chosen)
            denom = 1.0 + np.einsum("rd,rd->r", chosen, u)
            v_inv -= np.einsum("rd,re->rde", u, u) / denom[:, None, None]
            if t % spec.reinvert_every == 0:
                v_inv = np.linalg.inv(v_mat)
            theta_hat = np.einsum("rde,re->rd", v_inv, b_vec)

        counts[rows, idx] += 1
        cum += rewards
        noise += rewards - mean_chosen
        best = mean_all.max(axis=1)
        opt_total += best
        pseudo += best - mean_chosen
        if trace is not None:
            trace[:, t - 1] = idx

    if spec.kind == "linucb":
        limit = 2.0 * d * np.log(t_len) + 1e-9
        if (potential > limit).any():
            raise RuntimeError(
                "elliptical potential exceeded 2 d ln T; V^-1 maintenance is broken"
            )

    results = []
    for i in range(n_paths):
        results.append(
            EpisodeResult(
                pulls=counts[i],
                pseudo_regret=float(pseudo[i]),
                noise_sum=float(noise[i]),
                empirical_regret=float(opt_total[i] - cum[i]),
                cumulative_reward=float(cum[i]),
                arm_sequence=None if trace is None else trace[i].copy(),
                lin_potential=None if potential is None else float(potential[i]),
            )
        )
    return results


def _run_block(
    instance: BanditInstance | LinearInstance,
    spec: PolicySpec,
    master_seed: int,
    paths: np.ndarray,
    record_trace: bool,
) -> list[EpisodeResult]:
    if isinstance(instance, LinearInstance):
        if spec.kind not in ("linucb", "linrandom"):
            raise ValueError(f"policy {spec.kind!r} cannot run on a linear instance")
        return _run_linear_block(instance, spec, master_seed, paths, record_trace)
    if spec.kind in ("linucb", "linrandom"):
        raise ValueError(f"policy {spec.kind!r} needs a linear instance")
    return _run_mab_block(instance, spec, master_seed, paths, record_trace)


def run_episode(
    instance: BanditInstance | LinearInstance,
    spec: PolicySpec,
    master_seed: int,
    path: int = 0,
    record_trace: bool = False,
) -> EpisodeResult:
    """Simulate one path; deterministic given (master_seed, path)."""
    return _run_block(
        instance, spec, master_seed, np.asarray([path]), record_trace
    )[0]


def _worker(args) -> tuple[int, list[EpisodeResult]]:
    block_id, instance, spec, master_seed, paths, record_trace = args
    return block_id, _run_block(instance, spec, master_seed, paths, record_trace)


def stream_monte_carlo(
    config: RunConfig, workers: int = 1
) -> Iterator[EpisodeResult]:
    """Yield EpisodeResults for paths 0..R-1 in path order.

    Identical output for any ``workers`` value; memory stays bounded by the
    number of blocks in flight.
    """
    n = config.replications
    all_paths = np.arange(n)
    blocks = [
        all_paths[start : start + BLOCK_SIZE] for start in range(0, n, BLOCK_SIZE)
    ]
    jobs = [
        (i, config.instance, config.policy, config.master_seed, b, config.record_trace)
        for i, b in enumerate(blocks)
    ]
    if workers <= 1 or len(blocks) == 1:
        for job in jobs:
            yield from _worker(job)[1]
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for _, results in pool.map(_worker, jobs):
            yield from results


def run_monte_carlo(config: RunConfig, workers: int = 1) -> list[EpisodeResult]:
    """All EpisodeResults in path order (see stream_monte_carlo)."""
    return list(stream_monte_carlo(config, workers=workers))
