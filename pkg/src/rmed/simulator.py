"""Single-run simulation, regret accounting and cross-run aggregation.

``run`` dispatches to the compiled kernel in ``rmed._core`` when it is
available and to the pure-Python stepper otherwise; both produce bit-identical
traces for the same ``RunSpec``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .policies import RmedConfig, RucbConfig, loglog, make_policy, _E_E
from .preference import NoCondorcetWinnerError, PreferenceMatrix, condorcet_winner
from .rng import Xoshiro256, SplitMix64
from .stats import DuelStats


def duel(m: PreferenceMatrix, i: int, j: int, rng) -> int:
    """Winner of one comparison of arms i and j.

    One uniform variate is consumed even for a self-duel, whose outcome is
    discarded.
    """
    u = rng.random()
    if i == j:
        return i
    return i if u < m.mu(i, j) else j


def regret_increment(m: PreferenceMatrix, i: int, j: int) -> float:
    w = condorcet_winner(m)
    if w is None:
        raise NoCondorcetWinnerError("regret is undefined without a Condorcet winner")
    return (m.gap(w, i) + m.gap(w, j)) / 2.0


def _increment_table(m: PreferenceMatrix, w: int) -> list[list[float]]:
    gaps = [m.gap(w, i) for i in m.arms()]
    return [[(gaps[i] + gaps[j]) / 2.0 for j in range(m.k)] for i in range(m.k)]


def checkpoint_grid(horizon: int) -> np.ndarray:
    """Rounds floor(10^(k/20)) for k = 0, 1, ... up to the horizon, plus the horizon."""
    rounds = set()
    e = 0
    while True:
        r = math.floor(10.0 ** (e / 20.0))
        if r > horizon:
            break
        rounds.add(r)
        e += 1
    rounds.add(horizon)
    return np.array(sorted(rounds), dtype=np.int64)


@dataclass(frozen=True)
class RunSpec:
    matrix: PreferenceMatrix
    policy: RmedConfig | RucbConfig
    horizon: int
    seed: int
    dataset: str = ""
    checkpoints: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if isinstance(self.policy, RmedConfig):
            need = self.policy.initial_rounds(self.matrix.k)
            if self.horizon < need:
                raise ValueError(f"horizon {self.horizon} is shorter than the initial phase ({need})")
            if self.policy.variant == "RMED2FH" and self.policy.horizon != self.horizon:
                raise ValueError("RMED2FH horizon must equal the run horizon")
        if self.checkpoints is not None:
            c = self.checkpoints
            if any(b <= a for a, b in zip(c, c[1:])) or not c or c[0] < 1 or c[-1] > self.horizon:
                raise ValueError("checkpoints must be strictly increasing rounds within 1..horizon")

    def grid(self) -> np.ndarray:
        if self.checkpoints is not None:
            return np.array(self.checkpoints, dtype=np.int64)
        return checkpoint_grid(self.horizon)


@dataclass
class RegretTrace:
    rounds: np.ndarray
    regret: np.ndarray
    u_complement: int  # rounds where the true winner did not empirically beat every arm
    pair_counts: np.ndarray  # K x K comparison counts; diagonal holds self-duels
    seed: int = 0
    backend: str = field(default="python", compare=False)

    def __eq__(self, other):
        if not isinstance(other, RegretTrace):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.u_complement == other.u_complement
            and np.array_equal(self.rounds, other.rounds)
            and np.array_equal(self.regret, other.regret)
            and np.array_equal(self.pair_counts, other.pair_counts)
        )

    __hash__ = None

    @property
    def final_regret(self) -> float:
        return float(self.regret[-1])

    @property
    def self_duels(self) -> int:
        return int(np.trace(self.pair_counts))


def regret_from_counts(m: PreferenceMatrix, pair_counts) -> float:
    """Recompute R(T) from final comparison counts (diagonal = self-duels)."""
    w = condorcet_winner(m)
    if w is None:
        raise NoCondorcetWinnerError("regret is undefined without a Condorcet winner")
    inc = _increment_table(m, w)
    counts = np.asarray(pair_counts)
    terms = []
    for i in range(m.k):
        terms.append(int(counts[i, i]) * inc[i][i])
        for j in range(i + 1, m.k):
            terms.append(int(counts[i, j]) * inc[i][j])
    return math.fsum(terms)


def _policy_params(cfg, k: int) -> dict:
    if isinstance(cfg, RucbConfig):
        return dict(kind=3, f_k=0.0, alpha=cfg.alpha, init_repeats=0, fh_scale=1.0, paper_sign=False)
    kind = {"RMED1": 0, "RMED2": 1, "RMED2FH": 2}[cfg.variant]
    return dict(
        kind=kind,
        f_k=cfg.f(k),
        alpha=cfg.alpha if cfg.alpha is not None else 0.0,
        init_repeats=cfg.initial_repeats,
        fh_scale=loglog(cfg.horizon) if cfg.variant == "RMED2FH" else 1.0,
        paper_sign=cfg.paper_sign,
    )


def _run_compiled(spec: RunSpec, w: int, grid: np.ndarray) -> RegretTrace:
    m = spec.matrix
    k = m.k
    sm = SplitMix64(spec.seed)
    state = np.array([sm.next_u64() for _ in range(4)], dtype=np.uint64)
    inc = np.array(_increment_table(m, w), dtype=np.float64).ravel()
    mu = np.ascontiguousarray(m.values, dtype=np.float64).ravel()
    out = np.zeros(len(grid), dtype=np.float64)
    counts = np.zeros(k * k, dtype=np.int64)
    uc = _backend.core.simulate(
        k, mu, inc, w - 1, spec.horizon, state, grid, out, counts, _E_E,
        **_policy_params(spec.policy, k),
    )
    return RegretTrace(grid, out, int(uc), counts.reshape(k, k), spec.seed, "compiled")


def _run_python(spec: RunSpec, w: int, grid: np.ndarray, rng=None) -> RegretTrace:
    m = spec.matrix
    k = m.k
    mu = m.values.tolist()
    inc = _increment_table(m, w)
    if rng is None:
        rng = Xoshiro256.from_seed(spec.seed)
    stats = DuelStats(k)
    policy = make_policy(k, spec.policy, rng)
    self_duels = [0] * k
    out = np.zeros(len(grid), dtype=np.float64)
    marks = grid.tolist()
    gi = 0
    total = comp = 0.0
    uc = 0
    for t in range(1, spec.horizon + 1):
        if not stats.beats_all(w):
            uc += 1
        l, r = policy.next_pair(stats, t)
        u = rng.random()
        if l == r:
            self_duels[l - 1] += 1
        else:
            stats.record(l, r, l if u < mu[l - 1][r - 1] else r)
        # Neumaier-compensated running sum; keep in sync with _core.pyx
        x = inc[l - 1][r - 1]
        s = total + x
        if abs(total) >= abs(x):
            comp += (total - s) + x
        else:
            comp += (x - s) + total
        total = s
        policy.update(stats, t)
        if gi < len(marks) and t == marks[gi]:
            out[gi] = total + comp
            gi += 1
    counts = np.array(stats.pair_counts(), dtype=np.int64)
    counts[np.diag_indices(k)] = self_duels
    return RegretTrace(grid, out, uc, counts, spec.seed, "python")


def run(spec: RunSpec, backend: str = "auto", rng=None) -> RegretTrace:
    """Execute exactly ``spec.horizon`` duels and return the regret trace.

    ``backend`` is ``"auto"``, ``"compiled"`` or ``"python"``. Passing an
    ``rng`` (anything with ``random()`` and ``randbelow(n)``) replaces the
    seeded stream and implies the Python backend.
    """
    w = condorcet_winner(spec.matrix)
    if w is None:
        raise NoCondorcetWinnerError("regret is undefined without a Condorcet winner")
    grid = spec.grid()
    if rng is not None:
        if backend == "compiled":
            raise ValueError("a custom rng requires the Python backend")
        return _run_python(spec, w, grid, rng)
    if backend == "auto":
        backend = "compiled" if _backend.core is not None else "python"
    if backend == "compiled":
        if _backend.core is None:
            raise RuntimeError("compiled core is not available")
        return _run_compiled(spec, w, grid)
    if backend == "python":
        return _run_python(spec, w, grid)
    raise ValueError(f"unknown backend {backend!r}")


def run_many(specs: list[RunSpec], threads: int = 1, backend: str = "auto") -> list[RegretTrace]:
    """Run independent specs, in parallel when ``threads > 1``; output order follows input."""
    if threads <= 1 or len(specs) <= 1:
        return [run(s, backend) for s in specs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda s: run(s, backend), specs))


@dataclass
class Aggregate:
    rounds: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    runs: int


def aggregate(traces: list[RegretTrace]) -> Aggregate:
    """Per-checkpoint mean and unbiased standard deviation (0 for a single run)."""
    if not traces:
        raise ValueError("no traces to aggregate")
    rounds = traces[0].rounds
    for tr in traces[1:]:
        if not np.array_equal(tr.rounds, rounds):
            raise ValueError("traces have mismatched checkpoint rounds")
    data = np.vstack([tr.regret for tr in traces])
    mean = data.mean(axis=0)
    sd = data.std(axis=0, ddof=1) if len(traces) > 1 else np.zeros_like(mean)
    return Aggregate(rounds.copy(), mean, sd, len(traces))


def log_slope(rounds, values, lo: float, hi: float) -> float:
    """Least-squares slope of values against ln(rounds) over rounds in [lo, hi]."""
    rounds = np.asarray(rounds, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    sel = (rounds >= lo) & (rounds <= hi)
    if sel.sum() < 2:
        raise ValueError("need at least two checkpoints in the fitting window")
    slope, _ = np.polyfit(np.log(rounds[sel]), values[sel], 1)
    return float(slope)
