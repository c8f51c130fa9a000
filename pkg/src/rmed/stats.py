"""Sufficient statistics of observed duels and the empirical quantities RMED reads."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .divergence import bernoulli_kl


@dataclass(frozen=True)
class DivergenceSnapshot:
    divergences: tuple[float, ...]  # I_i for arms 1..K, stored 0-indexed
    istar: int
    istar_value: float

    def divergence(self, i: int) -> float:
        return self.divergences[i - 1]


class DuelStats:
    """Comparison counts per unordered pair, with one win counter for the lower arm.

    All arm arguments are 1-indexed. Self-duels are not statistics and are rejected.
    """

    def __init__(self, k: int):
        if k < 2:
            raise ValueError("need at least two arms")
        self.k = k
        self._pid = [[-1] * k for _ in range(k)]
        p = 0
        for i in range(k):
            for j in range(i + 1, k):
                self._pid[i][j] = self._pid[j][i] = p
                p += 1
        npairs = p
        self._n = [0] * npairs
        self._wins_low = [0] * npairs
        # n * d(mu_hat, 1/2) with mu_hat <= 1/2; d(p, 1/2) = d(1 - p, 1/2) serves both arms
        self._wdiv = [0.0] * npairs
        self.total = 0

    def _check_arm(self, i: int) -> None:
        if not 1 <= i <= self.k:
            raise ValueError(f"arm {i} outside 1..{self.k}")

    def record(self, i: int, j: int, winner: int) -> None:
        self._check_arm(i)
        self._check_arm(j)
        if i == j:
            raise ValueError("self-duels carry no statistic")
        if winner != i and winner != j:
            raise ValueError(f"winner {winner} is not one of ({i}, {j})")
        p = self._pid[i - 1][j - 1]
        n = self._n[p] + 1
        self._n[p] = n
        if winner == min(i, j):
            self._wins_low[p] += 1
        # evaluate on the losing side so both arms see the bitwise-same value
        a = self._wins_low[p]
        self._wdiv[p] = n * bernoulli_kl(min(a, n - a) / n, 0.5)
        self.total += 1

    def count(self, i: int, j: int) -> int:
        if i == j:
            return 0
        return self._n[self._pid[i - 1][j - 1]]

    def wins(self, i: int, j: int) -> int:
        """Number of duels in which arm i beat arm j."""
        if i == j:
            return 0
        p = self._pid[i - 1][j - 1]
        return self._wins_low[p] if i < j else self._n[p] - self._wins_low[p]

    def empirical_mean(self, i: int, j: int) -> float:
        """Estimate of mu(i, j), with 0/0 = 1/2 and mu_hat(i, i) = 1/2."""
        n = self.count(i, j)
        if n == 0:
            return 0.5
        return self.wins(i, j) / n

    def _is_opponent(self, i: int, j: int) -> bool:
        # mu_hat(i, j) <= 1/2 in exact integer arithmetic
        return 2 * self.wins(i, j) <= self.count(i, j)

    def empirical_opponents(self, i: int) -> set[int]:
        return {j for j in range(1, self.k + 1) if j != i and self._is_opponent(i, j)}

    def empirical_divergence(self, i: int) -> float:
        """I_i: sum over opponents j of N_ij d(mu_hat(i, j), 1/2)."""
        s = 0.0
        for j in range(1, self.k + 1):
            if j != i and self._is_opponent(i, j):
                s += self._wdiv[self._pid[i - 1][j - 1]]
        return s

    def snapshot(self) -> DivergenceSnapshot:
        divs = tuple(self.empirical_divergence(i) for i in range(1, self.k + 1))
        istar, best = 1, divs[0]
        for i in range(2, self.k + 1):
            if divs[i - 1] < best:
                istar, best = i, divs[i - 1]
        return DivergenceSnapshot(divs, istar, best)

    def is_candidate(
        self, i: int, t: int, f_k: float, snapshot: DivergenceSnapshot | None = None
    ) -> bool:
        """Whether arm i may still be the Condorcet winner: I_i - I* <= log t + f(K)."""
        if t < 1:
            raise ValueError("round t must be >= 1")
        snap = snapshot if snapshot is not None else self.snapshot()
        return snap.divergence(i) - snap.istar_value <= math.log(t) + f_k

    def beats_all(self, w: int) -> bool:
        """Whether arm w empirically beats every other arm (strictly)."""
        return all(2 * self.wins(w, j) > self.count(w, j) for j in range(1, self.k + 1) if j != w)

    def pair_counts(self):
        """K x K nested list of comparison counts (zero diagonal)."""
        return [[self.count(i, j) for j in range(1, self.k + 1)] for i in range(1, self.k + 1)]
