"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Prints one line per kernel with the best-of-repeat wall time of each
backend and the speed-up.
"""

import argparse
import timeit

import numpy as np

from zeroconc import kernels


def cases(quick):
    rng = np.random.default_rng(0)
    n_nodes = 256
    lam = np.sort(rng.uniform(0, 6, n_nodes))
    a, b = rng.standard_normal(n_nodes), rng.standard_normal(n_nodes)
    t = np.linspace(0, 100, 500 if quick else 2000)
    path = rng.standard_normal(20_000 if quick else 200_000)
    block = rng.standard_normal((2001, 64))
    left = np.linspace(0, 50, 40)
    circle = np.exp(2j * np.pi * np.arange(4096) / 4096) ** 3
    sq = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    sym = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    sym = sym + sym.T
    f64, c128 = np.ascontiguousarray, lambda x: np.ascontiguousarray(x, dtype=complex)
    return {
        "count_flips": lambda m: m.count_flips(f64(path)),
        "count_flips_columns": lambda m: m.count_flips_columns(f64(block)),
        "trig_sum": lambda m: m.trig_sum(lam, a, b, t),
        "refine_roots": lambda m: m.refine_roots(lam, a, b, left, left + 0.05, 52),
        "eval_field": lambda m: m.eval_field(lam, a, b, t[:500], np.full(500, 0.3)),
        "winding": lambda m: m.winding(c128(circle)),
        "permanent(8)": lambda m: m.permanent(c128(sq)),
        "hafnian(10)": lambda m: m.hafnian(c128(sym)),
    }


def best_time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 1 << 16:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--quick", action="store_true", help="smaller inputs")
    args = parser.parse_args(argv)
    if kernels.compiled_impl is None:
        raise SystemExit("compiled kernels are not built; run pip install -e . first")
    print(f"{'kernel':<22}{'compiled':>12}{'python':>12}{'speed-up':>10}")
    for name, call in cases(args.quick).items():
        fast = best_time(lambda: call(kernels.compiled_impl), args.repeat)
        slow = best_time(lambda: call(kernels.python_impl), args.repeat)
        print(f"{name:<22}{fast * 1e3:>10.3f}ms{slow * 1e3:>10.3f}ms{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
