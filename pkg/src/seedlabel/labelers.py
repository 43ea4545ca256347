"""Exemplar-based labeling functions.

Each expert-labeled exemplar becomes one voter: given an unlabeled instance
it emits the exemplar's class together with the similarity between the two
feature vectors, mapped onto (0, 1).  A voter may abstain (vote 0) when the
similarity falls below a threshold; with the default threshold of -1 no
voter ever abstains.

Scores are clamped into [1e-6, 1 - 1e-6] so downstream Beta log-densities
stay finite, and the abstain comparison happens in that clamped score space:
``abstain iff score < (threshold + 1) / 2``.  The clamp makes the extremes
total -- threshold -1 never abstains and threshold +1 always does, even for
exact duplicates of an exemplar.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .data import FeatureMatrix, LabelTable, fmt_float
from .errors import (
    DuplicateId,
    EmptyExemplarSet,
    EmptyFile,
    InputError,
    IoFailure,
    MalformedRow,
    MissingFeatureRow,
    UnknownId,
)
from .similarity import similarity_to_ref, validate_kernel_rows

SCORE_CLAMP = 1e-6


@dataclass(frozen=True, eq=False)
class ExemplarLF:
    """One labeling function anchored at a labeled exemplar."""

    index: int  # position in the voter list, 0-based
    exemplar_id: str
    class_index: int  # in 1..K
    vector: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64)
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)


@dataclass(frozen=True, eq=False)
class LFMatrix:
    """Votes and scores of b labeling functions over m instances.

    ``tau[i, j]`` is 0 (abstain) or the class of voter j; ``s[i, j]`` is the
    clamped unit-interval similarity score, recorded even on abstains.
    """

    ids: tuple[str, ...]
    tau: np.ndarray
    s: np.ndarray
    lf_classes: tuple[int, ...]
    K: int

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=np.int64)
        s = np.asarray(self.s, dtype=np.float64)
        m, b = tau.shape
        if s.shape != (m, b) or len(self.ids) != m or len(self.lf_classes) != b:
            raise ValueError("inconsistent LF matrix shapes")
        if b and not all(1 <= k <= self.K for k in self.lf_classes):
            raise ValueError("voter classes must lie in 1..K")
        if m and b:
            if not np.all((tau == 0) | (tau == np.asarray(self.lf_classes)[None, :])):
                raise ValueError("a voter may only vote its own class or abstain")
            if np.any(s <= 0.0) or np.any(s >= 1.0):
                raise ValueError("scores must lie strictly inside (0, 1)")
        tau.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "lf_classes", tuple(int(k) for k in self.lf_classes))

    @property
    def m(self) -> int:
        return self.tau.shape[0]

    @property
    def b(self) -> int:
        return self.tau.shape[1]


def make_lfs(exemplar_ids, labels: LabelTable, fm: FeatureMatrix) -> list[ExemplarLF]:
    """One labeling function per exemplar, in the given (selection) order."""
    exemplar_ids = list(exemplar_ids)
    if not exemplar_ids:
        raise EmptyExemplarSet("no exemplars to build labeling functions from")
    if len(set(exemplar_ids)) != len(exemplar_ids):
        raise DuplicateId("exemplar ids are not distinct")
    lfs = []
    for j, iid in enumerate(exemplar_ids):
        try:
            vec = fm.row(iid)
        except UnknownId:
            raise MissingFeatureRow(f"exemplar {iid!r} has no feature row") from None
        lfs.append(ExemplarLF(index=j, exemplar_id=iid, class_index=labels.class_of(iid), vector=vec))
    classes = {lf.class_index for lf in lfs}
    if len(classes) == 1:
        warnings.warn(
            f"all {len(lfs)} exemplars share class {labels.name_of(lfs[0].class_index)!r}; "
            "aggregation will predict a single class",
            stacklevel=2,
        )
    return lfs


def _scores_and_votes(lf: ExemplarLF, X, kernel: str, threshold: float):
    r = similarity_to_ref(X, lf.vector, kernel)
    s = np.clip((r + 1.0) / 2.0, SCORE_CLAMP, 1.0 - SCORE_CLAMP)
    tau = np.where(s < (threshold + 1.0) / 2.0, 0, lf.class_index)
    return tau, s


def apply_lf(lf: ExemplarLF, u, kernel: str = "pearson", threshold: float = -1.0):
    """Vote of one labeling function on one instance: (tau, score).

    tau is 0 on abstain (score below threshold) and the exemplar's class
    otherwise; the score is returned either way.
    """
    u = np.asarray(u, dtype=np.float64)
    tau, s = _scores_and_votes(lf, u[None, :], kernel, threshold)
    return int(tau[0]), float(s[0])


def apply_all(
    lfs,
    pool: FeatureMatrix,
    K: int,
    kernel: str = "pearson",
    threshold: float = -1.0,
) -> LFMatrix:
    """Materialize the m x b vote and score matrices over a feature pool.

    Cell (i, j) is bitwise identical to ``apply_lf(lfs[j], pool row i)``.
    """
    lfs = list(lfs)
    if not lfs:
        raise EmptyExemplarSet("no labeling functions to apply")
    validate_kernel_rows(pool.values, kernel, ids=pool.ids)
    m, b = pool.n, len(lfs)
    tau = np.empty((m, b), dtype=np.int64)
    s = np.empty((m, b), dtype=np.float64)
    for j, lf in enumerate(lfs):
        try:
            tau[:, j], s[:, j] = _scores_and_votes(lf, pool.values, kernel, threshold)
        except InputError as exc:
            raise type(exc)(f"voter {j} (exemplar {lf.exemplar_id!r}): {exc}") from exc
    return LFMatrix(
        ids=pool.ids,
        tau=tau,
        s=s,
        lf_classes=tuple(lf.class_index for lf in lfs),
        K=K,
    )


def empty_lf_matrix(lfs, K: int) -> LFMatrix:
    """LFMatrix over an empty pool (b columns, zero rows)."""
    lfs = list(lfs)
    return LFMatrix(
        ids=(),
        tau=np.empty((0, len(lfs)), dtype=np.int64),
        s=np.empty((0, len(lfs)), dtype=np.float64),
        lf_classes=tuple(lf.class_index for lf in lfs),
        K=K,
    )


# -- LF matrix file + sidecar ------------------------------------------------

def save_lf_matrix(csv_path, sidecar_path, lfm: LFMatrix, meta: dict) -> None:
    """Write ``id,tau_1,s_1,...,tau_b,s_b`` plus a JSON sidecar.

    ``meta`` must provide exemplar_ids, kernel, threshold and label_names;
    lf_classes and K come from the matrix itself.
    """
    header = ["id"]
    for j in range(lfm.b):
        header += [f"tau_{j + 1}", f"s_{j + 1}"]
    try:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for i, iid in enumerate(lfm.ids):
                row = [iid]
                for j in range(lfm.b):
                    row += [str(int(lfm.tau[i, j])), fmt_float(lfm.s[i, j])]
                writer.writerow(row)
    except OSError as exc:
        raise IoFailure(f"cannot write {csv_path}: {exc}") from exc
    doc = {
        "lf_classes": list(lfm.lf_classes),
        "K": lfm.K,
        "exemplar_ids": list(meta["exemplar_ids"]),
        "kernel": meta["kernel"],
        "abstain_threshold": meta["threshold"],
        "label_names": list(meta["label_names"]),
    }
    try:
        with open(sidecar_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {sidecar_path}: {exc}") from exc


def load_lf_sidecar(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid sidecar JSON: {exc}") from exc
    for key in ("lf_classes", "K", "exemplar_ids", "kernel", "abstain_threshold", "label_names"):
        if key not in doc:
            raise InputError(f"{path}: sidecar missing key {key!r}")
    return doc


def load_lf_matrix(csv_path, sidecar_path) -> tuple[LFMatrix, dict]:
    meta = load_lf_sidecar(sidecar_path)
    try:
        with open(csv_path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise InputError(f"{csv_path}: file not found") from None
    except OSError as exc:
        raise IoFailure(f"cannot read {csv_path}: {exc}") from exc
    if not rows:
        raise EmptyFile(f"{csv_path}: file is empty")
    b = len(meta["lf_classes"])
    if len(rows[0]) != 1 + 2 * b:
        raise MalformedRow(f"{csv_path}: header arity does not match sidecar voter count")
    ids = []
    tau = np.empty((len(rows) - 1, b), dtype=np.int64)
    s = np.empty((len(rows) - 1, b), dtype=np.float64)
    for r, row in enumerate(rows[1:]):
        if len(row) != 1 + 2 * b:
            raise MalformedRow(f"{csv_path} row {r + 2}: wrong arity")
        ids.append(row[0])
        try:
            tau[r] = [int(row[1 + 2 * j]) for j in range(b)]
            s[r] = [float(row[2 + 2 * j]) for j in range(b)]
        except ValueError:
            raise MalformedRow(f"{csv_path} row {r + 2}: non-numeric cell") from None
    lfm = LFMatrix(ids=tuple(ids), tau=tau, s=s, lf_classes=tuple(meta["lf_classes"]), K=meta["K"])
    return lfm, meta
