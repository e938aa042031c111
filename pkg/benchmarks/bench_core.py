"""Compiled core vs numpy fallback on the three hot loops.

    python benchmarks/bench_core.py --T 20000 --d 5 --kernel-T 1500
"""
import argparse
import timeit

import numpy as np

from wemm import _backend, _pure
from wemm.datagen import GeneratorSpec, generate


def bench_wemm(mod, X, y):
    T, d = X.shape
    return lambda: mod.wemm_pass(X, y, np.eye(d) / 2, np.zeros(d), *(np.zeros(T) for _ in range(4)))


def bench_second_order(mod, X, y):
    T, d = X.shape
    return lambda: mod.second_order_pass(_backend.AAR, X, y, np.eye(d), np.zeros(d), 1.0, np.zeros(T))


def bench_kernel(mod, X, y):
    T = X.shape[0]
    gram = X @ X.T

    def run():
        beta, alpha = np.zeros((T, T)), np.zeros(T)
        for n in range(T):
            kvec = np.zeros(n + 1)
            kvec[:n] = gram[n, :n]
            mod.kernel_step(beta, alpha, kvec, n, y[n], 0.5)

    return run


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--T", type=int, default=20000)
    parser.add_argument("--d", type=int, default=5)
    parser.add_argument("--kernel-T", type=int, default=1500)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    if not _backend.COMPILED:
        print("compiled core not built; only the fallback can be timed")
    stream, _ = generate(GeneratorSpec(kind="gaussian_noise", d=args.d, T=args.T, seed=1, sigma=0.1))
    X, y = stream.X, stream.y
    cases = [
        (f"wemm_pass T={args.T} d={args.d}", bench_wemm, X, y),
        (f"second_order_pass T={args.T} d={args.d}", bench_second_order, X, y),
        (f"kernel_step T={args.kernel_T}", bench_kernel, X[: args.kernel_T], y[: args.kernel_T]),
    ]
    print(f"{'loop':<36}{'compiled s':>12}{'numpy s':>12}{'speedup':>10}")
    for label, make, Xc, yc in cases:
        slow = best_of(make(_pure, Xc, yc), args.repeat)
        if _backend.COMPILED:
            from wemm import _core

            fast = best_of(make(_core, Xc, yc), args.repeat)
            print(f"{label:<36}{fast:>12.4f}{slow:>12.4f}{slow / fast:>9.1f}x")
        else:
            print(f"{label:<36}{'-':>12}{slow:>12.4f}{'-':>10}")


if __name__ == "__main__":
    main()
