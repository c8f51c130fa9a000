"""Relative Minimum Empirical Divergence (RMED) dueling bandits."""
from ._backend import HAVE_CORE
from .divergence import bernoulli_kl, kl_plus
from .policies import (
    RmedConfig,
    RmedPolicy,
    RucbConfig,
    RucbPolicy,
    estimate_best_opponent,
    rmed1_target,
    rmed2_target,
    rucb_next_pair,
)
from .preference import (
    PreferenceMatrix,
    arithmetic,
    best_opponent,
    condorcet_winner,
    cyclic,
    example1,
    from_csv,
    rmed1_lb_coefficient,
    six_rankers,
    superiors,
    to_csv,
    true_lb_coefficient,
    validate,
)
from .simulator import RegretTrace, RunSpec, aggregate, duel, regret_increment, run, run_many
from .stats import DivergenceSnapshot, DuelStats

__version__ = "0.1.0"
