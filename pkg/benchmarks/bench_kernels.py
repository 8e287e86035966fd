"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 50 100 200 400] [--repeat 3]

Both backends are called directly on the same int64 matrices, outputs are
compared for equality, and the best wall time of each is reported.
"""
import argparse
import time

import numpy as np

from ultracoarse._kernels import backends
from ultracoarse.generators import random_tree_metric, random_ultrametric

KERNELS = ("minimax_matrix", "triangle_violations", "ultrametric_violations", "components_below")


def _call(mod, name, a):
    if name == "components_below":
        return mod.components_below(a, np.int64(a.max() // 2 + 1))
    return getattr(mod, name)(a)


def _same(x, y):
    if isinstance(x, tuple):
        return all(_same(p, q) for p, q in zip(x, y))
    return np.array_equal(np.asarray(x), np.asarray(y))


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    mods = backends()
    if "numba" not in mods:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(7)
    print(f"{'kernel':<24}{'input':<8}{'n':>6}{'numpy s':>12}{'numba s':>12}{'speedup':>10}")
    for n in args.sizes:
        inputs = {"ultra": random_ultrametric(n, rng, scales=range(1, 9)),
                  "tree": random_tree_metric(n, rng)}
        for label, M in inputs.items():
            a = np.ascontiguousarray(M.scaled[0], dtype=np.int64)
            for name in KERNELS:
                out_np = _call(mods["numpy"], name, a)
                out_nb = _call(mods["numba"], name, a)  # also warms the JIT
                if not _same(out_np, out_nb):
                    raise SystemExit(f"{name} disagrees on {label} n={n}")
                t_np = best_time(lambda: _call(mods["numpy"], name, a), args.repeat)
                t_nb = best_time(lambda: _call(mods["numba"], name, a), args.repeat)
                print(f"{name:<24}{label:<8}{n:>6}{t_np:>12.5f}{t_nb:>12.5f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
