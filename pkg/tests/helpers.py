from rmed.policies import make_policy
from rmed.rng import Xoshiro256
from rmed.simulator import duel
from rmed.stats import DuelStats


def stats_from_means(m, n=100):
    """DuelStats whose every pair has n comparisons with wins = round(n * mu)."""
    s = DuelStats(m.k)
    for i in m.arms():
        for j in m.arms():
            if i < j:
                w = round(n * m.mu(i, j))
                for _ in range(w):
                    s.record(i, j, i)
                for _ in range(n - w):
                    s.record(i, j, j)
    return s


def drive(m, cfg, horizon, seed, policy=None, on_step=None):
    """Run the production stepper on the seeded outcome stream; returns the (l, m) trace."""
    rng = Xoshiro256.from_seed(seed)
    stats = DuelStats(m.k)
    policy = policy if policy is not None else make_policy(m.k, cfg, rng)
    trace = []
    for t in range(1, horizon + 1):
        l, r = policy.next_pair(stats, t)
        winner = duel(m, l, r, rng)
        if l != r:
            stats.record(l, r, winner)
        trace.append((l, r))
        phase = policy.phase if hasattr(policy, "phase") else None
        policy.update(stats, t)
        if on_step is not None:
            on_step(t, l, r, phase, policy, stats)
    return trace
