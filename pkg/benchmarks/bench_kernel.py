"""Benchmark the compiled steady-state kernel against the numpy fallback.

Usage: python benchmarks/bench_kernel.py [N_POINTS]

Solves N random three-temperature points for the transistor device with
each available backend and reports points/second and the speedup. Both
backends receive identical inputs; the result agreement is printed too.
"""

import sys
import time

import numpy as np

from q3heat import BatchEvaluator, DeviceParams
from q3heat._backend import available_backends


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 20000
    ev = BatchEvaluator(DeviceParams.resonant(0.9, 0.01))
    rng = np.random.default_rng(0)
    temps = rng.uniform(0.02, 1.0, (n, 3))
    gammas = np.full((n, 3), 1e-4)
    ohmic = np.zeros((n, 3), dtype=bool)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernel unavailable; benchmarking the fallback only")

    results = {}
    rates = {}
    for name, solve in backends.items():
        solve(ev.lam, ev.ch_bath, ev.ch_freq, ev.ch_a2, ev.ch_pairs,
              temps[:100], gammas[:100], ohmic[:100])  # warm-up
        t0 = time.perf_counter()
        out = solve(ev.lam, ev.ch_bath, ev.ch_freq, ev.ch_a2, ev.ch_pairs, temps, gammas, ohmic)
        dt = time.perf_counter() - t0
        rates[name] = n / dt
        results[name] = out
        print(f"{name:>7}: {n} points in {dt:.3f} s  ({rates[name]:,.0f} points/s)")

    if len(results) == 2:
        dp = np.nanmax(np.abs(results["cython"][0] - results["python"][0]))
        dq = np.nanmax(np.abs(results["cython"][1] - results["python"][1]))
        print(f"agreement: populations {dp:.2e}, currents {dq:.2e}")
        print(f"speedup: {rates['cython'] / rates['python']:.1f}x")


if __name__ == "__main__":
    main()
