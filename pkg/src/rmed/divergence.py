"""Bernoulli KL divergence primitives."""
import math


def _check(p: float, q: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie strictly inside (0, 1), got {q!r}")


def bernoulli_kl(p: float, q: float) -> float:
    """KL divergence d(p, q) between Bernoulli(p) and Bernoulli(q), in nats.

    Uses the 0 log 0 = 0 convention, so p in {0, 1} gives a finite value
    for any interior q.
    """
    _check(p, q)
    # keep this operation order in sync with _core.pyx (bitwise parity)
    d = 0.0
    if p > 0.0:
        d += p * math.log(p / q)
    if p < 1.0:
        d += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    # rounding can leave a tiny negative residue near p == q
    return d if d > 0.0 else 0.0


def kl_plus(p: float, q: float) -> float:
    """d(p, q) when p < q, else exactly 0."""
    _check(p, q)
    if p < q:
        return bernoulli_kl(p, q)
    return 0.0
