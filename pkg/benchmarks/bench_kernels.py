"""Time the numpy fallback against the compiled kernels.

    python benchmarks/bench_kernels.py [--repeat 3]

Every kernel is also checked for identical output across backends.
"""
import argparse
import time

import numpy as np

from orbitmatch import kernels
from orbitmatch.systems import DigitStream


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def cases():
    rng = np.random.default_rng(0)
    n = 10 ** 6
    xa, xb = DigitStream(2, seed=1, stream=0), DigitStream(3, seed=1, stream=1)
    cp = np.unique(np.geomspace(10, n, 30).astype(np.int64))
    stream_args = (xa.blocks(n), 2, xa.K, xa.D, xb.blocks(n), 3, xb.K, xb.D, n)
    U1, V1 = rng.random(10 ** 4), rng.random(10 ** 4)
    U2, V2 = rng.random((3000, 2)), rng.random((3000, 2))
    return [
        ("stream_min_curve  N=1e6", lambda be: be.stream_min_curve(*stream_args, cp)),
        ("stream_count_below N=1e6", lambda be: be.stream_count_below(*stream_args, 1e-3)),
        ("count_pairs_1d 1e4 x 1e4, 5 radii",
         lambda be: tuple(be.count_pairs_1d(U1, V1, r) for r in 2.0 ** -np.arange(2, 7))),
        ("count_pairs_grid 2-D 3e3 x 3e3, 4 radii",
         lambda be: tuple(be.count_pairs_grid(U2, V2, r) for r in 2.0 ** -np.arange(3, 7))),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled extension not built; run pip install -e . first")
    print(f"{'kernel':42s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, fn in cases():
        tp, op = best_of(lambda: fn(kernels.python_backend), args.repeat)
        tc, oc = best_of(lambda: fn(kernels.compiled_backend), args.repeat)
        flag = "" if same(op, oc) else "  OUTPUT MISMATCH"
        print(f"{name:42s} {tp:9.4f}s {tc:9.4f}s {tp / tc:7.1f}x{flag}")


if __name__ == "__main__":
    main()
