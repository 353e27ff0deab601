"""Time the compiled and numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints one row per (kernel, size) with the best-of-N time of each backend,
the speedup and whether both backends returned identical results.
"""

import argparse
import timeit

import numpy as np

from reachseg import kernels
from reachseg.shapes import perturbed_disk


def _workloads(n):
    curve = perturbed_disk(10.0, 1.0, 5, 2 * np.pi * 10.0 / n).outer
    a, b = curve.edges()
    rng = np.random.default_rng(0)
    pts = rng.uniform(-12, 12, size=(n, 2))
    nxt = np.roll(np.arange(len(a)), -1)
    return {
        "min_dist_to_segments": lambda k: k.min_dist_to_segments(pts, a, b),
        "even_odd_contains": lambda k: k.even_odd_contains(pts, a, b),
        "scanline_fill": lambda k: k.scanline_fill(a, b, -12.0, -12.0, 24.0 / 256, 256, 256),
        "first_crossing": lambda k: k.first_crossing(a, b, nxt, 1e-12),
    }


def _same(x, y):
    if isinstance(x, tuple):
        return tuple(x) == tuple(y)
    return np.array_equal(np.asarray(x), np.asarray(y)) or np.allclose(x, y, rtol=0, atol=1e-12)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 512, 2048])
    args = ap.parse_args()
    backends = kernels.backends()
    if "cython" not in backends:
        print("compiled backend not built; only the numpy backend is available")
    names = list(backends)
    print(f"{'kernel':<22}{'n':>6}" + "".join(f"{b + ' (ms)':>16}" for b in names)
          + f"{'speedup':>10}{'agree':>7}")
    for n in args.sizes:
        for kname, fn in _workloads(n).items():
            times, results = [], []
            for b in names:
                mod = backends[b]
                results.append(fn(mod))
                t = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
                times.append(1e3 * t)
            speed = times[0] / times[-1] if len(times) > 1 else float("nan")
            agree = all(_same(results[0], r) for r in results[1:])
            print(f"{kname:<22}{n:>6}" + "".join(f"{t:>16.3f}" for t in times)
                  + f"{speed:>10.1f}{'yes' if agree else 'NO':>7}")


if __name__ == "__main__":
    main()
