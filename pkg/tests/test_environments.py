import numpy as np
import pytest

from banditlab.core import BanditInstance, LinearInstance
from banditlab.environments import (
    ROLE_ENV,
    ROLE_POLICY,
    make_action_set,
    path_stream,
    sample_reward_linear,
    sample_reward_mab,
)


class TestPathStream:
    def test_rerun_reproduces_exactly(self):
        a = path_stream(20240, 17, ROLE_ENV).standard_normal(100)
        b = path_stream(20240, 17, ROLE_ENV).standard_normal(100)
        assert np.array_equal(a, b)

    def test_distinct_paths_distinct_streams(self):
        a = path_stream(20240, 0, ROLE_ENV).standard_normal(50)
        b = path_stream(20240, 1, ROLE_ENV).standard_normal(50)
        assert not np.array_equal(a, b)

    def test_roles_are_separate(self):
        a = path_stream(20240, 3, ROLE_ENV).standard_normal(50)
        b = path_stream(20240, 3, ROLE_POLICY).standard_normal(50)
        assert not np.array_equal(a, b)

    def test_validation(self):
        with pytest.raises(ValueError):
            path_stream(-1, 0, ROLE_ENV)
        with pytest.raises(ValueError):
            path_stream(2**64, 0, ROLE_ENV)
        with pytest.raises(ValueError):
            path_stream(0, -1, ROLE_ENV)


class TestMabRewards:
    def test_zero_noise_exact(self):
        inst = BanditInstance(means=(0.2, 0.8), noise_scale=0.0, horizon=3)
        rng = path_stream(1, 0, ROLE_ENV)
        assert sample_reward_mab(inst, 1, rng) == 0.8

    def test_arm_out_of_range(self):
        inst = BanditInstance(means=(0.2, 0.8), noise_scale=1.0, horizon=3)
        rng = path_stream(1, 0, ROLE_ENV)
        with pytest.raises(ValueError):
            sample_reward_mab(inst, 2, rng)

    def test_moment_match(self):
        # CLT tolerances: 3 / sqrt(n) for the mean, chi-square spread for the var
        inst = BanditInstance(means=(0.5, 0.9), noise_scale=1.0, horizon=3)
        rng = path_stream(123, 0, ROLE_ENV)
        n = 1_000_000
        draws = inst.means[0] + inst.noise_scale * rng.standard_normal(n)
        assert abs(draws.mean() - 0.5) <= 0.004
        assert abs(draws.var() - 1.0) <= 0.005

    def test_consumes_one_draw_even_at_zero_noise(self):
        inst = BanditInstance(means=(0.2, 0.8), noise_scale=0.0, horizon=3)
        rng_a = path_stream(5, 0, ROLE_ENV)
        sample_reward_mab(inst, 0, rng_a)
        follow_a = rng_a.standard_normal()
        rng_b = path_stream(5, 0, ROLE_ENV)
        rng_b.standard_normal()
        follow_b = rng_b.standard_normal()
        assert follow_a == follow_b


class TestLinearRewards:
    def test_aligned_and_orthogonal(self):
        inst = LinearInstance(theta=(1.0, 0.0), n_actions=4, noise_scale=0.0, horizon=5)
        rng = path_stream(1, 0, ROLE_ENV)
        assert sample_reward_linear(inst, np.array([1.0, 0.0]), rng) == 1.0
        assert sample_reward_linear(inst, np.array([0.0, 1.0]), rng) == 0.0

    def test_norm_violation(self):
        inst = LinearInstance(theta=(1.0, 0.0), n_actions=4, noise_scale=0.0, horizon=5)
        rng = path_stream(1, 0, ROLE_ENV)
        with pytest.raises(ValueError):
            sample_reward_linear(inst, np.array([1.0, 1.0]), rng)

    def test_mean_matches(self):
        inst = LinearInstance(theta=(0.6, -0.3), n_actions=4, noise_scale=1.0, horizon=5)
        action = np.array([0.6, 0.8])
        want = 0.6 * 0.6 - 0.3 * 0.8
        rng = path_stream(42, 0, ROLE_ENV)
        n = 200_000
        draws = np.array([sample_reward_linear(inst, action, rng) for _ in range(n)])
        assert abs(draws.mean() - want) <= 3 / np.sqrt(n)


class TestActionSets:
    def test_unit_norms(self):
        rng = path_stream(7, 0, ROLE_ENV)
        acts = make_action_set(5, 12, rng)
        assert acts.shape == (12, 5)
        np.testing.assert_allclose(np.linalg.norm(acts, axis=1), 1.0, atol=1e-12)

    def test_one_dimensional_sphere(self):
        rng = path_stream(7, 0, ROLE_ENV)
        acts = make_action_set(1, 20, rng)
        assert set(np.unique(acts)) <= {-1.0, 1.0}

    def test_deterministic_given_seed(self):
        a = make_action_set(3, 8, path_stream(9, 4, 2))
        b = make_action_set(3, 8, path_stream(9, 4, 2))
        assert np.array_equal(a, b)

    def test_validation(self):
        with pytest.raises(ValueError):
            make_action_set(0, 4, path_stream(1, 0, 2))
        with pytest.raises(ValueError):
            make_action_set(3, 0, path_stream(1, 0, 2))
