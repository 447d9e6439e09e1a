"""Benchmark the numba kernels against the pure-numpy fallback.

Usage::

    python3 benchmarks/bench_backends.py [--points 200] [--samples 1000000]
                                         [--layers 7] [--repeats 5]

Times both hot kernels (region tally, trajectory tally) under both
implementations, checks that the integer results agree bit-for-bit, and
prints a table of best-of-N wall times.  Numba JIT compilation happens in
an untimed warmup call.
"""

import argparse
import time

import numpy as np

from qmimo.backend import region_gain_count_numpy, trajectory_tally_numpy

try:
    from qmimo import _kernels_numba
except ImportError:
    _kernels_numba = None


def best_of(fn, args, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=200,
                        help="grid points per axis for the region kernel")
    parser.add_argument("--samples", type=int, default=1_000_000,
                        help="trajectory samples to tally")
    parser.add_argument("--layers", type=int, default=7,
                        help="crosstalk layers per trajectory sample")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions (best is reported)")
    args = parser.parse_args()

    etas = np.linspace(0.0, 0.5, args.points)
    epss = np.linspace(0.0, 1.0, args.points)
    lams = np.linspace(0.0, 1.0, args.points)

    gen = np.random.default_rng(0)
    uniforms = gen.random((args.samples, args.layers + 2))
    layer_etas = 0.4 / 1.2 ** np.arange(args.layers)
    tally_args = (uniforms, 0.1 ** (args.layers + 1), layer_etas, 0.1)

    cases = [("region", region_gain_count_numpy, (etas, epss, lams)),
             ("trajectory", trajectory_tally_numpy, tally_args)]

    print(f"region grid {args.points}^3 = {args.points ** 3:,} points; "
          f"trajectory {args.samples:,} samples x {args.layers} layers")
    print(f"{'kernel':<12} {'numpy':>10} {'numba':>10} {'speedup':>8}   result")
    for name, numpy_fn, fn_args in cases:
        t_np, r_np = best_of(numpy_fn, fn_args, args.repeats)
        if _kernels_numba is None:
            print(f"{name:<12} {t_np:>9.4f}s {'n/a':>10} {'n/a':>8}   {r_np}")
            continue
        numba_fn = getattr(_kernels_numba, "region_gain_count"
                           if name == "region" else "trajectory_tally")
        numba_fn(*fn_args)  # warmup: JIT compile / load from cache
        t_nb, r_nb = best_of(numba_fn, fn_args, args.repeats)
        match = "" if tuple(np.atleast_1d(r_np)) == tuple(np.atleast_1d(r_nb)) \
            else "  MISMATCH"
        print(f"{name:<12} {t_np:>9.4f}s {t_nb:>9.4f}s {t_np / t_nb:>7.1f}x"
              f"   {r_nb}{match}")


if __name__ == "__main__":
    main()
