"""Time the compiled and numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import itertools
import timeit

import numpy as np

from peakverify import kernels
from peakverify.domain import full_support
from peakverify.mechsim import _utilities, canonical_mechanism, states_over, truthful_profile
from peakverify.rules import make_true_median


def median_case():
    peaks = np.array(list(itertools.product(range(5), repeat=7)), dtype=np.int64)
    counts = np.array([2, 1, 0, 1, 2], dtype=np.int64)
    return "median_positions (5^7 profiles)", lambda impl: impl.median_positions(peaks, counts)


def nash_case():
    s = full_support(3)
    f = make_true_median(3, s)
    mech = canonical_mechanism(f, 2)
    g = mech.tensor()
    state = next(iter(states_over(s, 3)))
    truthful = truthful_profile(mech, state)
    # every message consistent with each agent's own private preference
    cands = [np.array([j for j, m in enumerate(mech.messages) if m.preference == tm.preference],
                      dtype=np.int64) for tm in truthful]
    score, bonus = _utilities(mech, state, honesty=False)
    return f"nash_mask (k={mech.k}, n=3)", lambda impl: impl.nash_mask(g, mech.k, cands, score, bonus)


def synthetic_nash_case(n=4, k=30, m=4):
    rng = np.random.default_rng(0)
    g = rng.integers(0, m, size=k ** n).astype(np.int8)
    score = rng.integers(0, 8, size=(n, m)).astype(np.int64)
    bonus = rng.integers(0, 2, size=(n, k)).astype(np.int64)
    cands = [np.arange(k, dtype=np.int64)] * n
    return f"nash_mask (random, k={k}, n={n})", lambda impl: impl.nash_mask(g, k, cands, score, bonus)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if "compiled" not in kernels.BACKENDS:
        print("compiled extension not built; timing the numpy fallback only")
    print(f"{'kernel':<34}{'backend':<10}{'best ms':>10}{'speedup':>10}")
    for name, fn in (median_case(), nash_case(), synthetic_nash_case()):
        times = {}
        for backend, impl in sorted(kernels.BACKENDS.items()):
            fn(impl)
            times[backend] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat))
        if len(times) == 2:
            a, b = (fn(kernels.BACKENDS[x]) for x in ("compiled", "python"))
            assert np.array_equal(a, b), f"backends disagree on {name}"
        base = times["python"]
        for backend, t in times.items():
            print(f"{name:<34}{backend:<10}{t * 1e3:>10.2f}{base / t:>9.1f}x")


if __name__ == "__main__":
    main()
