"""Numba-jitted implementations of the hot kernels.

Same contract as the numpy backend (see its module docstring).  Every
``prange`` loop writes disjoint output cells and accumulates sequentially
inside one thread, so results are deterministic run to run.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def fl_gains(S, mx):
    n = S.shape[0]
    out = np.empty(n, dtype=np.float64)
    for j in prange(n):
        acc = 0.0
        for i in range(n):
            d = S[j, i] - mx[i]
            if d > 0.0:
                acc += d
        out[j] = acc
    return out


@njit(cache=True)
def fl_gain_col(S, mx, j):
    n = S.shape[0]
    acc = 0.0
    for i in range(n):
        d = S[j, i] - mx[i]
        if d > 0.0:
            acc += d
    return acc


@njit(cache=True, parallel=True)
def row_dots(X, v):
    m, d = X.shape
    out = np.empty(m, dtype=np.float64)
    for i in prange(m):
        acc = 0.0
        for k in range(d):
            acc += X[i, k] * v[k]
        out[i] = acc
    return out


@njit(cache=True, parallel=True)
def row_sq(X):
    m, d = X.shape
    out = np.empty(m, dtype=np.float64)
    for i in prange(m):
        acc = 0.0
        for k in range(d):
            acc += X[i, k] * X[i, k]
        out[i] = acc
    return out


@njit(cache=True, parallel=True)
def pairwise_dots(X):
    n, d = X.shape
    out = np.empty((n, n), dtype=np.float64)
    for i in prange(n):
        for j in range(i, n):
            acc = 0.0
            for k in range(d):
                acc += X[i, k] * X[j, k]
            out[i, j] = acc
            out[j, i] = acc
    return out


@njit(cache=True, parallel=True)
def evidence_logits(fire, ls, l1s, const, pa, pb):
    m, b = fire.shape
    kk = const.shape[1]
    out = np.zeros((m, kk), dtype=np.float64)
    for i in prange(m):
        for j in range(b):
            f = fire[i, j]
            if f != 0.0:
                for y in range(kk):
                    out[i, y] += const[j, y] + pa[j, y] * ls[i, j] + pb[j, y] * l1s[i, j]
    return out
