"""Pair-selection policies: the RMED family as a resumable stepper, and RUCB.

A policy is driven one round at a time::

    l, m = policy.next_pair(stats, t)
    ...  # simulator draws the duel and records it in ``stats``
    policy.update(stats, t)

Arms are 1-indexed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .divergence import bernoulli_kl, kl_plus
from .stats import DivergenceSnapshot, DuelStats

VARIANTS = ("RMED1", "RMED2", "RMED2FH")

_E_E = math.exp(math.e)


def loglog(x: float) -> float:
    """log log x, clamped so that the result is at least 1."""
    return math.log(math.log(max(x, _E_E)))


@dataclass(frozen=True)
class RmedConfig:
    variant: str = "RMED1"
    c: float = 0.3
    eps: float = 0.01
    alpha: float | None = None
    horizon: int | None = None
    # estimate gaps as 1/2 - mu_hat (as printed) instead of max(mu_hat - 1/2, 0)
    paper_sign: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.c < 0 or self.eps < 0:
            raise ValueError("c and eps must be nonnegative")
        if self.variant == "RMED1":
            if self.alpha is not None:
                raise ValueError("alpha is only used by RMED2 and RMED2FH")
        elif self.alpha is None or not self.alpha > 0:
            raise ValueError(f"{self.variant} requires alpha > 0")
        if self.variant == "RMED2FH":
            if self.horizon is None or self.horizon < 1:
                raise ValueError("RMED2FH requires a horizon >= 1")
        elif self.horizon is not None:
            raise ValueError("horizon is only used by RMED2FH")

    def f(self, k: int) -> float:
        """Exploration slack f(K) = c K^(1+eps)."""
        return self.c * k ** (1.0 + self.eps)

    @property
    def initial_repeats(self) -> int:
        if self.variant == "RMED2FH":
            return max(1, math.ceil(self.alpha * loglog(self.horizon)))
        return 1

    def initial_rounds(self, k: int) -> int:
        return self.initial_repeats * k * (k - 1) // 2


@dataclass(frozen=True)
class RucbConfig:
    alpha: float = 0.51

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("RUCB alpha must be positive")


# ---------------------------------------------------------------- subroutines


def rmed1_target(l: int, stats: DuelStats, snapshot: DivergenceSnapshot | None = None) -> int:
    """Comparison target for arm l: i*(t) when it is an opponent of l or l has none,
    otherwise the arm l fares worst against."""
    snap = snapshot if snapshot is not None else stats.snapshot()
    istar = snap.istar
    opponents = stats.empirical_opponents(l)
    if not opponents or istar in opponents:
        return istar
    best, best_mean = None, math.inf
    for j in range(1, stats.k + 1):
        if j == l:
            continue
        mean = stats.empirical_mean(l, j)
        if mean < best_mean:
            best, best_mean = j, mean
    return best


def _gap_estimate(stats: DuelStats, a: int, j: int, paper_sign: bool) -> float:
    mean = stats.empirical_mean(a, j)
    if paper_sign:
        return 0.5 - mean
    return max(mean - 0.5, 0.0)


def estimate_best_opponent(
    i: int, stats: DuelStats, istar: int | None = None, paper_sign: bool = False
) -> int:
    """Plug-in estimate of the cheapest arm to eliminate arm i with.

    Pairs that i does not empirically lose get cost +inf; ties and the
    all-infinite case resolve to the lowest index.
    """
    if istar is None:
        istar = stats.snapshot().istar
    gap_i = _gap_estimate(stats, istar, i, paper_sign)
    best, best_cost = None, math.inf
    for j in range(1, stats.k + 1):
        if j == i:
            continue
        dplus = kl_plus(stats.empirical_mean(i, j), 0.5)
        if dplus > 0.0:
            cost = (gap_i + _gap_estimate(stats, istar, j, paper_sign)) / dplus
        else:
            cost = math.inf
        if best is None or cost < best_cost:
            best, best_cost = j, cost
    return best


def rmed2_target(
    l: int,
    stats: DuelStats,
    t: int,
    cfg: RmedConfig,
    snapshot: DivergenceSnapshot | None = None,
    bhat: int | None = None,
) -> int:
    """Comparison target for RMED2 and RMED2FH.

    RMED2 re-estimates the best opponent on every call; RMED2FH must pass the
    value frozen after its initial phase as ``bhat``.
    """
    snap = snapshot if snapshot is not None else stats.snapshot()
    if cfg.variant == "RMED2":
        bhat = estimate_best_opponent(l, stats, snap.istar, cfg.paper_sign)
        scale = loglog(t)
    elif cfg.variant == "RMED2FH":
        if bhat is None:
            raise ValueError("RMED2FH needs the frozen best-opponent estimate")
        scale = loglog(cfg.horizon)
    else:
        raise ValueError(f"rmed2_target does not serve {cfg.variant}")
    if bhat in stats.empirical_opponents(l) and (
        stats.count(l, snap.istar) >= stats.count(l, bhat) / scale
    ):
        return bhat
    return rmed1_target(l, stats, snap)


# ---------------------------------------------------------------- RMED stepper


class RmedPolicy:
    """RMED main routine as a state machine emitting one pair per round.

    Phases: ``initial`` (every pair drawn L times, round-robin in lexicographic
    order), ``forced`` (RMED2 only: top-up of under-sampled pairs before each
    loop) and ``main``.
    """

    def __init__(self, k: int, cfg: RmedConfig):
        self.k = k
        self.cfg = cfg
        self.f_k = cfg.f(k)
        self._pairs = [(i, j) for i in range(1, k + 1) for j in range(i + 1, k + 1)]
        self._init_left = cfg.initial_repeats * len(self._pairs)
        self._init_pos = 0
        self.phase = "initial"
        self.current: list[int] = []  # L_C
        self.remaining: set[int] = set()  # L_R
        self.next_loop: list[int] = []  # L_N
        self.cursor = 0
        self.frozen_bhat: dict[int, int] | None = None
        self._forced_pos = 0
        self._pending: int | None = None

    def _start_loop(self, arms: list[int]) -> None:
        if not arms:
            raise RuntimeError("RMED loop would start with no arms")
        self.current = sorted(arms)
        self.remaining = set(self.current)
        self.next_loop = []
        self.cursor = 0
        if self.cfg.variant == "RMED2":
            self.phase = "forced"
            self._forced_pos = 0
        else:
            self.phase = "main"

    def _finish_initial(self, stats: DuelStats) -> None:
        if self.cfg.variant == "RMED2FH":
            istar = stats.snapshot().istar
            self.frozen_bhat = {
                i: estimate_best_opponent(i, stats, istar, self.cfg.paper_sign)
                for i in range(1, self.k + 1)
            }
        self._start_loop(list(range(1, self.k + 1)))

    def next_pair(self, stats: DuelStats, t: int) -> tuple[int, int]:
        if self._pending is not None:
            raise RuntimeError("update() was not called after the previous main-loop draw")
        if self.phase == "initial":
            if self._init_pos < self._init_left:
                pair = self._pairs[self._init_pos % len(self._pairs)]
                self._init_pos += 1
                return pair
            self._finish_initial(stats)
        if self.phase == "forced":
            threshold = self.cfg.alpha * loglog(t)
            while self._forced_pos < len(self._pairs):
                i, j = self._pairs[self._forced_pos]
                if stats.count(i, j) < threshold:
                    return i, j
                self._forced_pos += 1
            self.phase = "main"
        if not self.current or self.cursor >= len(self.current):
            raise RuntimeError("RMED state corrupted: empty current loop")
        l = self.current[self.cursor]
        snap = stats.snapshot()
        if self.cfg.variant == "RMED1":
            m = rmed1_target(l, stats, snap)
        else:
            bhat = self.frozen_bhat[l] if self.frozen_bhat is not None else None
            m = rmed2_target(l, stats, t, self.cfg, snap, bhat)
        self._pending = l
        return l, m

    def update(self, stats: DuelStats, t: int) -> None:
        """Advance the loop after the outcome of round t has been recorded."""
        l = self._pending
        if l is None:
            return
        self._pending = None
        self.remaining.discard(l)
        snap = stats.snapshot()
        for j in range(1, self.k + 1):
            if j in self.remaining or j in self.next_loop:
                continue
            if stats.is_candidate(j, t, self.f_k, snap):
                self.next_loop.append(j)
        self.cursor += 1
        if self.cursor == len(self.current):
            self._start_loop(self.next_loop)


# ---------------------------------------------------------------- RUCB


class RucbPolicy:
    """Relative Upper Confidence Bound with a uniformly randomised candidate choice."""

    def __init__(self, k: int, cfg: RucbConfig, rng):
        self.k = k
        self.cfg = cfg
        self.rng = rng

    def ucb(self, stats: DuelStats, i: int, j: int, t: int) -> float:
        if i == j:
            return 0.5
        n = stats.count(i, j)
        if n == 0:
            return 1.0
        u = stats.empirical_mean(i, j) + math.sqrt(self.cfg.alpha * math.log(t) / n)
        return u if u < 1.0 else 1.0

    def next_pair(self, stats: DuelStats, t: int) -> tuple[int, int]:
        k = self.k
        u = [[self.ucb(stats, i, j, t) for j in range(1, k + 1)] for i in range(1, k + 1)]
        cands = [i for i in range(1, k + 1) if all(x >= 0.5 for x in u[i - 1])]
        if not cands:
            l = self.rng.randbelow(k) + 1
        elif len(cands) == 1:
            l = cands[0]
        else:
            l = cands[self.rng.randbelow(len(cands))]
        # l may only be compared with itself when it is the sole candidate
        allow_self = cands == [l]
        best_u, ties = -math.inf, []
        for j in range(1, k + 1):
            if j == l and not allow_self:
                continue
            x = u[j - 1][l - 1]
            if x > best_u:
                best_u, ties = x, [j]
            elif x == best_u:
                ties.append(j)
        m = ties[0] if len(ties) == 1 else ties[self.rng.randbelow(len(ties))]
        return l, m

    def update(self, stats: DuelStats, t: int) -> None:
        pass


def rucb_next_pair(stats: DuelStats, t: int, cfg: RucbConfig, rng) -> tuple[int, int]:
    return RucbPolicy(stats.k, cfg, rng).next_pair(stats, t)


def make_policy(k: int, cfg, rng):
    if isinstance(cfg, RmedConfig):
        return RmedPolicy(k, cfg)
    if isinstance(cfg, RucbConfig):
        return RucbPolicy(k, cfg, rng)
    raise TypeError(f"unknown policy config {cfg!r}")


def policy_name(cfg) -> str:
    return cfg.variant if isinstance(cfg, RmedConfig) else "RUCB"
