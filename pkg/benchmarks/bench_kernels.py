"""
Compare the numba and pure-numpy Verlet kernels.

    python benchmarks/bench_kernels.py [--sizes 256 2048 16384] [--steps 2000] [--repeat 3]

Each case is run once to warm up (numba compiles on first call), then timed
``repeat`` times; the best wall time per backend is reported together with
the max difference between the two final states.
"""

import argparse
import time

import numpy as np

from sglab import _kernels


def _case(n, seed=0):
    rng = np.random.default_rng(seed)
    x = np.sin(np.linspace(0, 6 * np.pi, n)) + 0.01 * rng.standard_normal(n)
    v = np.zeros(n)
    return x, v


def _time_sine(backend, n, steps, repeat):
    prev = _kernels.use_backend(backend)
    try:
        x, v = _case(n)
        _kernels.sine_chain(x.copy(), v.copy(), 2, 0.01, 1.0, 1.0, 1.0, True)  # warm-up
        best = float("inf")
        for _ in range(repeat):
            xx, vv = x.copy(), v.copy()
            t0 = time.perf_counter()
            _kernels.sine_chain(xx, vv, steps, 0.01, 1.0, 1.0, 1.0, True)
            best = min(best, time.perf_counter() - t0)
        return best, xx
    finally:
        _kernels.use_backend(prev)


def _time_linear(backend, n, steps, repeat):
    prev = _kernels.use_backend(backend)
    try:
        x, v = _case(n)
        w = np.cos(x)
        _kernels.linear_chain(x.copy(), v.copy(), 2, 0.01, 1.0, w, False)
        best = float("inf")
        for _ in range(repeat):
            xx, vv = x.copy(), v.copy()
            t0 = time.perf_counter()
            _kernels.linear_chain(xx, vv, steps, 0.01, 1.0, w, False)
            best = min(best, time.perf_counter() - t0)
        return best, xx
    finally:
        _kernels.use_backend(prev)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[256, 2048, 16384])
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    backends = _kernels.available_backends()
    if "numba" not in backends:
        print("numba not installed; only the numpy backend is available")
    print(f"{'kernel':<8} {'n':>7} " + " ".join(f"{b + ' [s]':>12}" for b in backends)
          + f" {'speedup':>8} {'max|diff|':>10}")
    for kernel, fn in (("sine", _time_sine), ("linear", _time_linear)):
        for n in args.sizes:
            results = {b: fn(b, n, args.steps, args.repeat) for b in backends}
            times = " ".join(f"{results[b][0]:12.4f}" for b in backends)
            if len(backends) == 2:
                speedup = results["numpy"][0] / results["numba"][0]
                diff = float(np.max(np.abs(results["numpy"][1] - results["numba"][1])))
                print(f"{kernel:<8} {n:>7} {times} {speedup:8.1f} {diff:10.2e}")
            else:
                print(f"{kernel:<8} {n:>7} {times}")


if __name__ == "__main__":
    main()
