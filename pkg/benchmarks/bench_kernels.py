"""Time the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Both backends are loaded
side by side, so no rebuild or environment switch is needed.
"""
import argparse
import math
import timeit

import numpy as np

from wignerkin import _pykernels

try:
    from wignerkin import _kernels
except ImportError:
    _kernels = None


def cases(n):
    xs = np.linspace(-12.0, 12.0, n)
    ps = xs.copy()
    grid = _pykernels.cat_grid(xs, ps, math.sqrt(2.0), 0.0, 0.0, 0.5)
    dx = xs[1] - xs[0]
    r = 12.0 * math.sqrt(2.0)
    q = np.arange(-r, r + dx / 2, dx)
    wu = np.full(q.size, dx)
    wu[[0, -1]] *= 0.5
    theta = math.atan(0.2)
    return {
        "cat_grid": lambda mod: mod.cat_grid(xs, ps, math.sqrt(2.0), 0.0, 0.7, 0.5),
        "gauss_grid": lambda mod: mod.gauss_grid(xs, ps, 1.0, -0.5, 0.7, 1.0),
        "line_integrals": lambda mod: mod.line_integrals(grid, -12.0, dx, -12.0, dx, q, q, wu,
                                                         math.cos(theta), math.sin(theta)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1025, help="nodes per axis")
    ap.add_argument("--repeat", type=int, default=5, help="timing repeats (best is reported)")
    args = ap.parse_args(argv)

    backends = [("python", _pykernels)] + ([("compiled", _kernels)] if _kernels else [])
    print(f"grid {args.n} x {args.n}; best of {args.repeat}")
    print(f"{'kernel':<16}" + "".join(f"{name:>12}" for name, _ in backends) + "     speedup")
    for label, fn in cases(args.n).items():
        times = [min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
                 for _, mod in backends]
        row = f"{label:<16}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>11.1f}x"
        print(row)
    if _kernels is None:
        print("compiled extension not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
