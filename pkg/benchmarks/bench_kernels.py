"""Benchmark the numba kernels against the pure numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]

Shapes mirror the training hot path: cross-entropy over subtoken or span
logits, Adam updates on the head parameters, and the span-representation
gather.  The first numba call is excluded from timing (JIT compile).
"""

import argparse
import time

import numpy as np

from nerduo.kernels import load_backend

numpy_k = load_backend("numpy")
numba_k = load_backend("numba")


def _time(fn, repeats):
    fn()  # warm up (and compile, for numba)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_softmax_xent(rng, repeats):
    cases = []
    for n, c in ((128, 61), (1275, 31), (5050, 31)):
        logits = rng.normal(size=(n, c))
        gold = rng.integers(0, c, size=n)
        mask = np.ones(n, dtype=bool)
        cases.append((f"softmax_xent {n}x{c}", logits, gold, mask))
    for name, logits, gold, mask in cases:
        t_np = _time(lambda: numpy_k.softmax_xent(logits, gold, mask), repeats)
        t_nb = _time(lambda: numba_k.softmax_xent(logits, gold, mask), repeats)
        yield name, t_np, t_nb


def bench_adam(rng, repeats):
    for size in (61 * 1024, 31 * 2048):
        param = rng.normal(size=size)
        grad = rng.normal(size=size)
        m = np.zeros(size)
        v = np.zeros(size)
        name = f"adam_update n={size}"
        t_np = _time(lambda: numpy_k.adam_update(param, grad, m, v, 5, 1e-3, 0.9, 0.999, 1e-8), repeats)
        t_nb = _time(lambda: numba_k.adam_update(param, grad, m, v, 5, 1e-3, 0.9, 0.999, 1e-8), repeats)
        yield name, t_np, t_nb


def bench_gather(rng, repeats):
    for n, d in ((100, 1024), (160, 512)):
        emb = rng.normal(size=(n, d))
        pairs = [(b, e) for b in range(n) for e in range(b, n)]
        begins = np.asarray([b for b, _ in pairs], dtype=np.int64)
        ends = np.asarray([e for _, e in pairs], dtype=np.int64)
        name = f"gather_span_reps k={len(pairs)} d={d}"
        t_np = _time(lambda: numpy_k.gather_span_reps(emb, begins, ends), repeats)
        t_nb = _time(lambda: numba_k.gather_span_reps(emb, begins, ends), repeats)
        yield name, t_np, t_nb


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    print(f"{'kernel':<34} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for gen in (bench_softmax_xent, bench_adam, bench_gather):
        for name, t_np, t_nb in gen(rng, args.repeats):
            print(f"{name:<34} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} {t_np / t_nb:>8.2f}x")


if __name__ == "__main__":
    main()
