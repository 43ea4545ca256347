"""Pairwise similarity between feature vectors.

Two kernels are supported: ``pearson`` (centered cosine, the default) and
``cosine``.  Raw scores live in [-1, 1]; before any submodular or voting use
they are mapped onto [0, 1] by the order-preserving affine map (r + 1) / 2.
The full matrix is computed once per unordered pair and mirrored, its
diagonal pinned to exactly 1.

Scores are normalized as dot / sqrt(sq_u * sq_v) rather than by a product of
norms: with round-to-nearest, sqrt(x * x) == x, so identical vectors score
exactly 1.0 instead of drifting an ulp away.

A built matrix can be cached to disk as a small binary file (header with n
and the kernel tag, payload the row-major upper triangle as little-endian
float64) so repeated CLI invocations skip the O(n^2 d) build.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .data import FeatureMatrix
from .errors import (
    DimensionMismatch,
    InputError,
    IoFailure,
    UnknownId,
    ZeroNormVector,
    ZeroVarianceVector,
)

KERNELS = ("pearson", "cosine")

_CACHE_MAGIC = b"SLSIM"
_CACHE_VERSION = 1
_KERNEL_TAGS = {"pearson": 1, "cosine": 2}
_TAG_KERNELS = {v: k for k, v in _KERNEL_TAGS.items()}


def _check_kernel(kernel: str) -> str:
    if kernel not in KERNELS:
        raise InputError(f"unknown similarity kernel {kernel!r}; choose from {KERNELS}")
    return kernel


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric n x n matrix of pairwise similarities in [0, 1]."""

    ids: tuple[str, ...]
    values: np.ndarray
    kernel: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        n = len(self.ids)
        if vals.shape != (n, n):
            raise ValueError(f"similarity matrix shape {vals.shape} does not match {n} ids")
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise ValueError("similarity entries must lie in [0, 1]")
        if not np.array_equal(vals, vals.T):
            raise ValueError("similarity matrix must be exactly symmetric")
        if not np.all(np.diagonal(vals) == 1.0):
            raise ValueError("similarity diagonal must be exactly 1")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "_index", {i: k for k, i in enumerate(self.ids)})

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def index_of(self, instance_id: str) -> int:
        try:
            return self._index[instance_id]
        except KeyError:
            raise UnknownId(f"unknown instance id {instance_id!r}") from None


def _center(x: np.ndarray, kernel: str) -> np.ndarray:
    # Rows are centered for pearson; cosine uses them as-is.
    if kernel == "pearson":
        return x - x.mean(axis=-1, keepdims=True)
    return x


def _row_sq(xc: np.ndarray, kernel: str, ids=None) -> np.ndarray:
    sq = _kernels.row_sq(xc)
    bad = np.flatnonzero(sq == 0.0)
    if bad.size:
        where = f" (id {ids[bad[0]]!r})" if ids is not None else ""
        if kernel == "pearson":
            raise ZeroVarianceVector(f"constant vector has no pearson correlation{where}")
        raise ZeroNormVector(f"all-zero vector has no cosine similarity{where}")
    return sq


def raw_similarity(u, v, kernel: str = "pearson") -> float:
    """Raw similarity score in [-1, 1] between two vectors.

    pearson is the correlation of the (mean-centered) vectors, cosine the
    inner product of the L2-normalized vectors.  Floating-point spill
    outside [-1, 1] is clamped.
    """
    _check_kernel(kernel)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionMismatch(f"vector shapes differ: {u.shape} vs {v.shape}")
    return float(similarity_to_ref(u[None, :], v, kernel)[0])


def similarity_to_ref(X, ref, kernel: str = "pearson") -> np.ndarray:
    """Raw similarity of every row of ``X`` to the single vector ``ref``.

    Row i of the result is bitwise identical to ``raw_similarity(X[i], ref)``;
    the batched form exists so the labeling functions can score a whole pool
    per exemplar in one pass.
    """
    _check_kernel(kernel)
    X = np.asarray(X, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if X.ndim != 2 or ref.ndim != 1 or X.shape[1] != ref.shape[0]:
        raise DimensionMismatch(f"shapes {X.shape} and {ref.shape} are incompatible")
    xc = _center(X, kernel)
    xsq = _row_sq(xc, kernel)
    rc = _center(ref[None, :], kernel)[0]
    rsq = _row_sq(rc[None, :], kernel)[0]
    r = _kernels.row_dots(xc, rc) / np.sqrt(xsq * rsq)
    return np.clip(r, -1.0, 1.0)


def validate_kernel_rows(X, kernel: str, ids=None) -> None:
    """Raise (with the offending id) if any row is degenerate for the kernel."""
    _check_kernel(kernel)
    _row_sq(_center(np.asarray(X, dtype=np.float64), kernel), kernel, ids=ids)


def to_unit_interval(r):
    """Affine map [-1, 1] -> [0, 1]: (r + 1) / 2.  Strictly monotone."""
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < -1.0) or np.any(r > 1.0):
        raise ValueError("raw score outside [-1, 1]")
    out = (r + 1.0) / 2.0
    return float(out) if out.ndim == 0 else out


def build_similarity_matrix(fm: FeatureMatrix, kernel: str = "pearson") -> SimilarityMatrix:
    """Pairwise unit-interval similarity over all rows of a FeatureMatrix.

    S[i, j] = (raw_similarity(row_i, row_j) + 1) / 2, with the diagonal pinned
    to exactly 1 and strict symmetry (each unordered pair computed once).
    Every entry depends only on its own row pair, so permuting input rows
    permutes S identically.
    """
    _check_kernel(kernel)
    xc = _center(fm.values, kernel)
    sq = _row_sq(xc, kernel, ids=fm.ids)
    r = _kernels.pairwise_dots(xc) / np.sqrt(np.multiply.outer(sq, sq))
    r = np.clip(r, -1.0, 1.0)
    s = (r + 1.0) / 2.0
    np.fill_diagonal(s, 1.0)
    return SimilarityMatrix(ids=fm.ids, values=s, kernel=kernel)


# -- binary cache ---------------------------------------------------------

def save_similarity_cache(path, sm: SimilarityMatrix) -> None:
    """Persist a similarity matrix (header: n, kernel tag; payload: upper triangle)."""
    n = sm.n
    iu = np.triu_indices(n)
    tri = np.ascontiguousarray(sm.values[iu], dtype="<f8")
    header = _CACHE_MAGIC + struct.pack("<BBQ", _CACHE_VERSION, _KERNEL_TAGS[sm.kernel], n)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(tri.tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_similarity_cache(path, ids) -> SimilarityMatrix:
    """Load a cached matrix; ``ids`` supplies the row labels and must match n."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    head_len = len(_CACHE_MAGIC) + struct.calcsize("<BBQ")
    if len(blob) < head_len or blob[: len(_CACHE_MAGIC)] != _CACHE_MAGIC:
        raise InputError(f"{path}: not a similarity cache file")
    version, tag, n = struct.unpack("<BBQ", blob[len(_CACHE_MAGIC) : head_len])
    if version != _CACHE_VERSION:
        raise InputError(f"{path}: unsupported cache version {version}")
    if tag not in _TAG_KERNELS:
        raise InputError(f"{path}: unknown kernel tag {tag}")
    ids = tuple(ids)
    if len(ids) != n:
        raise InputError(f"{path}: cache holds {n} instances, caller supplied {len(ids)} ids")
    count = n * (n + 1) // 2
    tri = np.frombuffer(blob, dtype="<f8", offset=head_len, count=count)
    if tri.shape[0] != count:
        raise InputError(f"{path}: truncated payload")
    values = np.empty((n, n), dtype=np.float64)
    iu = np.triu_indices(n)
    values[iu] = tri
    low = np.tril_indices(n, -1)
    values[low] = values.T[low]
    return SimilarityMatrix(ids=ids, values=values, kernel=_TAG_KERNELS[tag])
