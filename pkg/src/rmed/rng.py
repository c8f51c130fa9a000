"""Platform-independent random streams: xoshiro256** seeded through SplitMix64.

Both generators follow the public-domain reference code by Blackman and Vigna.
The compiled core carries a C copy of the same generator; any change here must
be mirrored in ``_core.pyx``.
"""
from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_NEG_53 = 1.0 / (1 << 53)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """xoshiro256** 1.0."""

    def __init__(self, state):
        s = [int(x) & MASK64 for x in state]
        if len(s) != 4 or not any(s):
            raise ValueError("state must be four 64-bit words, not all zero")
        self.s = s

    @classmethod
    def from_seed(cls, seed: int) -> Xoshiro256:
        sm = SplitMix64(seed)
        return cls([sm.next_u64() for _ in range(4)])

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _TWO_NEG_53

    def randbelow(self, n: int) -> int:
        """Uniform-ish integer in [0, n); bias is below 2**-50 for the n used here."""
        return int(self.random() * n)


def run_seeds(base_seed: int, runs: int) -> list[int]:
    """Per-run 64-bit seeds: the first ``runs`` SplitMix64 outputs from ``base_seed``."""
    sm = SplitMix64(base_seed)
    return [sm.next_u64() for _ in range(runs)]
