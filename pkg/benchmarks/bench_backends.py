"""Rounds per second of the compiled core versus the pure-Python fallback.

    python3 benchmarks/bench_backends.py [--horizon N] [--repeat R]
"""
import argparse
import time

from rmed import HAVE_CORE
from rmed.policies import RmedConfig, RucbConfig
from rmed.preference import cyclic, six_rankers
from rmed.simulator import RunSpec, run

CASES = [
    ("six_rankers", six_rankers(), "RMED1", RmedConfig("RMED1")),
    ("six_rankers", six_rankers(), "RUCB", RucbConfig()),
    ("cyclic", cyclic(), "RMED1", RmedConfig("RMED1")),
    ("cyclic", cyclic(), "RMED2", RmedConfig("RMED2", alpha=3)),
]


def best_rate(spec, backend, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        trace = run(spec, backend)
        best = min(best, time.perf_counter() - start)
    return spec.horizon / best, trace


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=50_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_CORE:
        raise SystemExit("compiled core not built; run `pip install --no-build-isolation -e .`")
    print(f"{'dataset':<12} {'policy':<6} {'compiled r/s':>14} {'python r/s':>12} {'speedup':>8}  same")
    for name, m, label, cfg in CASES:
        spec = RunSpec(m, cfg, args.horizon, seed=1)
        fast, a = best_rate(spec, "compiled", args.repeat)
        slow, b = best_rate(spec, "python", 1)
        print(f"{name:<12} {label:<6} {fast:>14,.0f} {slow:>12,.0f} {fast / slow:>7.0f}x  {a == b}")


if __name__ == "__main__":
    main()
