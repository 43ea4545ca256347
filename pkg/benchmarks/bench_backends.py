#!/usr/bin/env python3
"""Head-to-head timing of the numba and pure-numpy kernel backends.

Times each hot kernel on synthetic inputs, checks both backends agree, and
runs a full facility-location greedy selection through each backend by
swapping the kernel facade (the same switch the SEEDLABEL_BACKEND
environment variable performs at import time).

    python benchmarks/bench_backends.py --n 2000 --d 64 --budget 50
"""

import argparse
import time

import numpy as np

import seedlabel._kernels as facade
from seedlabel._kernels import numpy_backend

try:
    from seedlabel._kernels import numba_backend
except ImportError:
    numba_backend = None

from seedlabel.select import FACILITY_LOCATION, SubmodularObjective, greedy_select
from seedlabel.similarity import SimilarityMatrix

KERNEL_NAMES = ("fl_gains", "fl_gain_col", "row_dots", "row_sq", "pairwise_dots", "evidence_logits")


def swap_backend(module):
    for name in KERNEL_NAMES:
        setattr(facade, name, getattr(module, name))


def timeit(fn, repeats):
    fn()  # warm (JIT compile on the numba side)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def build_inputs(n, d, m, b, K, seed):
    rng = np.random.default_rng(seed)
    S = rng.random((n, n))
    S = (S + S.T) / 2.0
    np.fill_diagonal(S, 1.0)
    mx = rng.random(n)
    X = rng.standard_normal((n, d))
    v = rng.standard_normal(d)
    fire = (rng.random((m, b)) < 0.9).astype(np.float64)
    ls = np.log(rng.uniform(0.05, 0.95, (m, b)))
    l1s = np.log(rng.uniform(0.05, 0.95, (m, b)))
    const = rng.standard_normal((b, K))
    pa = rng.standard_normal((b, K))
    pb = rng.standard_normal((b, K))
    return S, mx, X, v, (fire, ls, l1s, const, pa, pb)


def greedy_case(S, budget, backend_module):
    swap_backend(backend_module)
    sm = SimilarityMatrix(ids=tuple(f"i{k}" for k in range(S.shape[0])), values=S, kernel="pearson")
    res = greedy_select(SubmodularObjective(kind=FACILITY_LOCATION, S=sm), budget)
    return res.ids


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2000, help="pool size")
    parser.add_argument("--d", type=int, default=64, help="feature dimension")
    parser.add_argument("--m", type=int, default=5000, help="instances for the evidence kernel")
    parser.add_argument("--b", type=int, default=40, help="voters for the evidence kernel")
    parser.add_argument("--budget", type=int, default=50, help="greedy selection budget")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if numba_backend is None:
        print("numba is not installed; nothing to compare")
        return 1

    S, mx, X, v, ev = build_inputs(args.n, args.d, args.m, args.b, 2, seed=0)
    cases = {
        "fl_gains": lambda be: be.fl_gains(S, mx),
        "fl_gain_col x100": lambda be: [be.fl_gain_col(S, mx, j) for j in range(100)],
        "row_dots": lambda be: be.row_dots(X, v),
        "pairwise_dots": lambda be: be.pairwise_dots(X),
        "evidence_logits": lambda be: be.evidence_logits(*ev),
    }

    print(f"pool n={args.n}, d={args.d}; evidence m={args.m}, b={args.b}")
    print(f"{'kernel':<18} {'numpy':>10} {'numba':>10} {'speedup':>8} {'max |diff|':>11}")
    for name, fn in cases.items():
        t_np = timeit(lambda: fn(numpy_backend), args.repeats)
        t_nb = timeit(lambda: fn(numba_backend), args.repeats)
        a = np.asarray(fn(numpy_backend))
        b_out = np.asarray(fn(numba_backend))
        diff = float(np.max(np.abs(a - b_out)))
        print(f"{name:<18} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms {t_np / t_nb:>7.1f}x {diff:>11.2e}")

    t_np = timeit(lambda: greedy_case(S, args.budget, numpy_backend), 1)
    ids_np = greedy_case(S, args.budget, numpy_backend)
    t_nb = timeit(lambda: greedy_case(S, args.budget, numba_backend), 1)
    ids_nb = greedy_case(S, args.budget, numba_backend)
    agree = "identical" if ids_np == ids_nb else "DIFFERENT"
    print(
        f"{'greedy select':<18} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
        f"{t_np / t_nb:>7.1f}x   picks {agree}"
    )
    swap_backend(numba_backend if facade.BACKEND == "numba" else numpy_backend)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
