"""Pure-numpy implementations of the hot kernels.

Contract shared with the numba backend:

* per-element results are bitwise independent of batch size, so a scalar
  call equals the matching row/column of a batched call;
* ``fl_gain_col(S, mx, j) == fl_gains(S, mx)[j]`` bitwise (the lazy and the
  exhaustive greedy compare gains computed through both entry points);
* ``S`` passed to the facility-location kernels is exactly symmetric, so
  column ``j`` may be read as row ``j``.

The bitwise guarantees hold because every reduction here runs along the
contiguous axis, which numpy reduces per output element.
"""

import numpy as np


def fl_gains(S, mx):
    """Facility-location marginal gain of every candidate column.

    ``out[j] = sum_i max(0, S[i, j] - mx[i])`` with S symmetric.
    """
    return np.maximum(S - mx[None, :], 0.0).sum(axis=1)


def fl_gain_col(S, mx, j):
    """Facility-location marginal gain of the single candidate ``j``."""
    return np.maximum(S[j] - mx, 0.0).sum()


def row_dots(X, v):
    """Dot product of every row of ``X`` with the vector ``v``."""
    return (X * v[None, :]).sum(axis=1)


def row_sq(X):
    """Squared L2 norm of every row, same accumulation order as row_dots."""
    return (X * X).sum(axis=1)


def pairwise_dots(X):
    """Symmetric matrix of row dot products, upper triangle mirrored."""
    n = X.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        out[i, i:] = (X[i:] * X[i]).sum(axis=1)
    low = np.tril_indices(n, -1)
    out[low] = out.T[low]
    return out


def evidence_logits(fire, ls, l1s, const, pa, pb):
    """Per-instance, per-class log evidence accumulated over voters.

    ``out[i, y] = sum_j fire[i, j] * (const[j, y]
                  + pa[j, y] * ls[i, j] + pb[j, y] * l1s[i, j])``

    Each class column is reduced independently (no matmul), so permuting
    the columns of const/pa/pb permutes the output columns bitwise.
    """
    m = fire.shape[0]
    kk = const.shape[1]
    out = np.empty((m, kk), dtype=np.float64)
    for y in range(kk):
        out[:, y] = (fire * (const[:, y] + pa[:, y] * ls + pb[:, y] * l1s)).sum(axis=1)
    return out
