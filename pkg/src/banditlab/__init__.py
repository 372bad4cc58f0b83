"""Monte Carlo laboratory for stochastic bandit policies whose confidence
bonuses are designed for light-tailed regret risk."""

from .analysis import (
    TailReport,
    bound_anytime,
    bound_k_armed,
    bound_k_armed_optimal,
    bound_linear,
    empirical_tail,
    histogram,
    neat_form_bound,
    summarize,
    wilson_interval,
)
from .bonus import (
    BonusSchedule,
    rad_anytime,
    rad_linear,
    rad_new,
    rad_optimal,
    rad_standard,
)
from .core import (
    BanditInstance,
    EpisodeResult,
    LinearInstance,
    RunConfig,
    decompose_regret,
    pseudo_regret,
)
from .environments import (
    make_action_set,
    path_stream,
    sample_reward_linear,
    sample_reward_mab,
)
from .policies import PolicySpec, default_etc_budget, make_policy
from .simulator import run_episode, run_monte_carlo, stream_monte_carlo

__version__ = "0.1.0"

__all__ = [
    "BanditInstance",
    "BonusSchedule",
    "EpisodeResult",
    "LinearInstance",
    "PolicySpec",
    "RunConfig",
    "TailReport",
    "bound_anytime",
    "bound_k_armed",
    "bound_k_armed_optimal",
    "bound_linear",
    "decompose_regret",
    "default_etc_budget",
    "empirical_tail",
    "histogram",
    "make_action_set",
    "make_policy",
    "neat_form_bound",
    "path_stream",
    "pseudo_regret",
    "rad_anytime",
    "rad_linear",
    "rad_new",
    "rad_optimal",
    "rad_standard",
    "run_episode",
    "run_monte_carlo",
    "sample_reward_linear",
    "sample_reward_mab",
    "stream_monte_carlo",
    "summarize",
    "wilson_interval",
]
