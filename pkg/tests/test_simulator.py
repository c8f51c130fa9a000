import math

import numpy as np
import pytest

from rmed import _backend
from rmed.policies import RmedConfig, RucbConfig
from rmed.preference import NoCondorcetWinnerError, PreferenceMatrix, cyclic, example1, six_rankers
from rmed.rng import Xoshiro256
from rmed.simulator import (
    RunSpec,
    aggregate,
    checkpoint_grid,
    duel,
    log_slope,
    regret_from_counts,
    regret_increment,
    run,
    run_many,
)

needs_core = pytest.mark.skipif(_backend.core is None, reason="compiled core not built")

POLICIES = [
    RmedConfig("RMED1"),
    RmedConfig("RMED1", c=0.0),
    RmedConfig("RMED2", alpha=3),
    RmedConfig("RMED2", alpha=3, paper_sign=True),
    RucbConfig(),
]


def total_duels(counts):
    return int(np.trace(counts) + np.triu(counts, 1).sum())


class Rigged:
    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)

    def randbelow(self, n):
        return int(self.random() * n)


def test_duel_degenerate_and_self():
    m = PreferenceMatrix([[0.5, 1.0], [0.0, 0.5]])
    rng = Xoshiro256.from_seed(1)
    assert all(duel(m, 1, 2, rng) == 1 for _ in range(100))
    assert all(duel(m, 2, 1, rng) == 1 for _ in range(100))
    r = Rigged([0.3, 0.99])
    assert duel(m, 2, 2, r) == 2
    assert r.values == [0.99]  # the self-duel still consumed its variate


def test_duel_frequency():
    m = example1(0.7)
    rng = Xoshiro256.from_seed(7)
    n = 100_000
    wins = sum(duel(m, 1, 3, rng) == 1 for _ in range(n))
    assert abs(wins / n - 0.7) <= 3 * math.sqrt(0.21 / n)


def test_regret_increment():
    m = six_rankers()
    assert regret_increment(m, 5, 6) == pytest.approx(0.11)
    assert regret_increment(m, 1, 2) == pytest.approx(0.025)
    assert regret_increment(m, 1, 1) == 0.0
    with pytest.raises(NoCondorcetWinnerError):
        regret_increment(PreferenceMatrix([[0.5, 0.6, 0.4], [0.4, 0.5, 0.6], [0.6, 0.4, 0.5]]), 1, 2)


def test_checkpoint_grid():
    g = checkpoint_grid(1000)
    assert g[0] == 1 and g[-1] == 1000
    assert list(g[:12]) == [1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 14]
    assert set(g) == {math.floor(10 ** (e / 20)) for e in range(61)}
    assert np.all(np.diff(g) > 0)
    assert checkpoint_grid(99)[-1] == 99


def test_hand_simulated_trace():
    m = PreferenceMatrix([[0.5, 0.7], [0.3, 0.5]])
    tr = run(RunSpec(m, RmedConfig("RMED1"), 3, 0, checkpoints=[1, 2, 3]), rng=Rigged([0.0, 0.9, 0.0]))
    # (1,2) won by 1; arm 1 has no opponents so it duels itself; arm 2 then faces arm 1 and wins
    assert tr.regret.tolist() == pytest.approx([0.1, 0.1, 0.2])
    assert tr.self_duels == 1
    assert tr.u_complement == 1
    assert total_duels(tr.pair_counts) == 3


def test_horizon_equal_to_initial_phase():
    m = six_rankers()
    tr = run(RunSpec(m, RmedConfig("RMED1"), 15, 3))
    assert tr.rounds[-1] == 15
    counts = tr.pair_counts
    assert np.trace(counts) == 0
    assert total_duels(counts) == 15
    assert tr.final_regret == pytest.approx(regret_from_counts(m, counts), abs=1e-12)
    with pytest.raises(ValueError):
        RunSpec(m, RmedConfig("RMED1"), 14, 3)


def test_spec_validation():
    m = cyclic()
    with pytest.raises(ValueError):
        RunSpec(m, RmedConfig("RMED2FH", alpha=3, horizon=500), 400, 0)
    with pytest.raises(ValueError):
        RunSpec(m, RmedConfig("RMED1"), 100, -1)
    with pytest.raises(ValueError):
        RunSpec(m, RmedConfig("RMED1"), 100, 0, checkpoints=[5, 3])
    with pytest.raises(ValueError):
        run(RunSpec(m, RmedConfig("RMED1"), 100, 0), backend="gpu")


@pytest.mark.parametrize("cfg", POLICIES, ids=str)
def test_conservation_and_recompute(cfg):
    m = six_rankers()
    for seed in range(3):
        tr = run(RunSpec(m, cfg, 3000, seed))
        assert total_duels(tr.pair_counts) == 3000
        assert np.array_equal(tr.pair_counts, tr.pair_counts.T)  # comparisons are unordered
        assert abs(tr.final_regret - regret_from_counts(m, tr.pair_counts)) <= 1e-9
        assert np.all(np.diff(tr.regret) >= 0)
        assert 0 <= tr.u_complement <= 3000


@pytest.mark.parametrize("cfg", POLICIES, ids=str)
def test_deterministic(cfg):
    m = cyclic()
    a = run(RunSpec(m, cfg, 2000, 5))
    b = run(RunSpec(m, cfg, 2000, 5))
    assert a == b
    assert a != run(RunSpec(m, cfg, 2000, 6))


@needs_core
@pytest.mark.parametrize("cfg", POLICIES + [RmedConfig("RMED2FH", alpha=3, horizon=2000)], ids=str)
@pytest.mark.parametrize("m", [six_rankers(), cyclic(), example1(0.8)], ids=repr)
def test_backends_bit_identical(cfg, m):
    for seed in (0, 1, 2**63 + 5):
        a = run(RunSpec(m, cfg, 2000, seed), backend="compiled")
        b = run(RunSpec(m, cfg, 2000, seed), backend="python")
        assert np.array_equal(a.regret, b.regret)
        assert np.array_equal(a.pair_counts, b.pair_counts)
        assert a.u_complement == b.u_complement


def test_run_many_order_and_threads():
    m = cyclic()
    specs = [RunSpec(m, RmedConfig("RMED1"), 1000, s) for s in range(6)]
    seq = run_many(specs, threads=1)
    par = run_many(specs, threads=4)
    assert seq == par
    assert [t.seed for t in par] == list(range(6))


def test_aggregate():
    m = cyclic()
    traces = [run(RunSpec(m, RmedConfig("RMED1"), 500, s)) for s in range(4)]
    agg = aggregate(traces)
    data = np.vstack([t.regret for t in traces])
    assert agg.runs == 4
    np.testing.assert_allclose(agg.mean, data.mean(axis=0))
    np.testing.assert_allclose(agg.sd, data.std(axis=0, ddof=1))
    assert np.all(aggregate(traces[:1]).sd == 0)
    with pytest.raises(ValueError):
        aggregate([])
    other = run(RunSpec(m, RmedConfig("RMED1"), 600, 0))
    with pytest.raises(ValueError):
        aggregate([traces[0], other])


def test_log_slope():
    r = np.array([10, 100, 1000, 10000])
    assert log_slope(r, 3 * np.log(r) + 1, 1, 1e9) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        log_slope(r, r, 5000, 1e9)


def test_pure_python_fallback_selected_by_env():
    import os
    import subprocess
    import sys

    code = ("from rmed import HAVE_CORE; from rmed.simulator import run, RunSpec; "
            "from rmed.preference import cyclic; from rmed.policies import RmedConfig; "
            "t = run(RunSpec(cyclic(), RmedConfig('RMED1'), 200, 1)); print(HAVE_CORE, t.backend)")
    env = dict(os.environ, RMED_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "python"]
