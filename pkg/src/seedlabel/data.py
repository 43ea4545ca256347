"""Core data model and on-disk formats.

Everything downstream works on two validated structures: a ``FeatureMatrix``
(instance ids plus an n x d float matrix) and a ``LabelTable`` (id -> class
index, with class indices assigned 1..K by sorted label string; index 0 is
reserved for "abstain" and never appears in a table).  Loaders validate
eagerly so the numerical modules can assume their invariants.

File formats:

* features CSV   -- header ``id,f0,...,f{d-1}``, one row per instance;
* labels CSV     -- header ``id,label``;
* predictions CSV -- header ``id,predicted_label,p_1,...,p_K``.

Floats are serialized with ``repr``, the shortest string that round-trips a
64-bit float exactly, so save/load is lossless.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DuplicateId,
    EmptyFile,
    EmptyLabelSet,
    InputError,
    IoFailure,
    MalformedRow,
    SingleClass,
    UnknownId,
)

# Plain ints are used for seeds everywhere; they must fit an unsigned 64-bit
# word so every RNG construction is well defined.
Seed = int

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def fmt_float(x: float) -> str:
    """Shortest decimal string that parses back to the same 64-bit float."""
    return repr(float(x))


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Instance ids plus their n x d feature values, in file order."""

    ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValueError("feature values must be a 2-D array")
        n, d = vals.shape
        if n < 1 or d < 1:
            raise ValueError(f"feature matrix must be at least 1x1, got {n}x{d}")
        if len(self.ids) != n:
            raise ValueError(f"{len(self.ids)} ids for {n} rows")
        if len(set(self.ids)) != n:
            raise DuplicateId("feature ids are not unique")
        if not np.all(np.isfinite(vals)):
            raise ValueError("feature values contain NaN or Inf")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "_index", {i: k for k, i in enumerate(self.ids)})

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def index_of(self, instance_id: str) -> int:
        try:
            return self._index[instance_id]
        except KeyError:
            raise UnknownId(f"unknown instance id {instance_id!r}") from None

    def row(self, instance_id: str) -> np.ndarray:
        return self.values[self.index_of(instance_id)]

    def subset(self, ids) -> "FeatureMatrix":
        """New matrix with the given ids, in the given order."""
        idx = [self.index_of(i) for i in ids]
        return FeatureMatrix(ids=tuple(self.ids[k] for k in idx), values=self.values[idx].copy())


@dataclass(frozen=True)
class LabelTable:
    """Map id -> class index 1..K; index 0 is reserved for abstain."""

    entries: dict[str, int]
    label_names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.label_names)
        if list(names) != sorted(names):
            raise ValueError("label_names must be sorted lexicographically")
        k = len(names)
        if k < 1:
            raise EmptyLabelSet("no label names")
        for iid, c in self.entries.items():
            if not 1 <= c <= k:
                raise ValueError(f"class index {c} for id {iid!r} outside 1..{k}")
        object.__setattr__(self, "label_names", names)

    @property
    def K(self) -> int:
        return len(self.label_names)

    def class_of(self, instance_id: str) -> int:
        try:
            return self.entries[instance_id]
        except KeyError:
            raise UnknownId(f"no label for id {instance_id!r}") from None

    def name_of(self, class_index: int) -> str:
        return self.label_names[class_index - 1]

    @classmethod
    def from_pairs(cls, pairs) -> "LabelTable":
        """Build a table from (id, label-string) pairs; K from distinct strings."""
        pairs = list(pairs)
        if not pairs:
            raise EmptyLabelSet("no labeled instances")
        names = sorted({lbl for _, lbl in pairs})
        if len(names) == 1:
            raise SingleClass(f"all instances share the label {names[0]!r}")
        index = {name: i + 1 for i, name in enumerate(names)}
        entries: dict[str, int] = {}
        for iid, lbl in pairs:
            if iid in entries:
                raise DuplicateId(f"id {iid!r} labeled more than once")
            entries[iid] = index[lbl]
        return cls(entries=entries, label_names=tuple(names))


# -- CSV loaders ----------------------------------------------------------

def _read_rows(path) -> list[list[str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def load_features(path) -> FeatureMatrix:
    """Parse a features CSV (header ``id,f0,...,f{d-1}``)."""
    rows = _read_rows(path)
    if not rows:
        raise EmptyFile(f"{path}: file is empty")
    header = rows[0]
    if len(header) < 2 or header[0] != "id":
        raise MalformedRow(f"{path}: header must be id,f0,...,f{{d-1}}")
    d = len(header) - 1
    body = rows[1:]
    if not body:
        raise EmptyFile(f"{path}: no data rows")
    ids: list[str] = []
    seen: set[str] = set()
    values = np.empty((len(body), d), dtype=np.float64)
    for r, row in enumerate(body):
        if len(row) != d + 1:
            raise MalformedRow(f"{path} row {r + 2}: expected {d + 1} fields, got {len(row)}")
        iid = row[0]
        if iid in seen:
            raise DuplicateId(f"{path}: duplicate id {iid!r}")
        seen.add(iid)
        ids.append(iid)
        for c, tok in enumerate(row[1:]):
            try:
                x = float(tok)
            except ValueError:
                raise MalformedRow(f"{path} row {r + 2}: non-numeric field {tok!r}") from None
            if not math.isfinite(x):
                raise MalformedRow(f"{path} row {r + 2}: non-finite field {tok!r}")
            values[r, c] = x
    return FeatureMatrix(ids=tuple(ids), values=values)


def load_labels(path, ids) -> LabelTable:
    """Parse a labels CSV (header ``id,label``); every file id must be in ``ids``."""
    known = set(ids)
    rows = _read_rows(path)
    if not rows:
        raise EmptyFile(f"{path}: file is empty")
    if rows[0][:2] != ["id", "label"] or len(rows[0]) != 2:
        raise MalformedRow(f"{path}: header must be id,label")
    pairs: list[tuple[str, str]] = []
    for r, row in enumerate(rows[1:]):
        if len(row) != 2:
            raise MalformedRow(f"{path} row {r + 2}: expected 2 fields, got {len(row)}")
        iid, lbl = row
        if iid not in known:
            raise UnknownId(f"{path}: id {iid!r} is not in the selected id set")
        if not lbl.strip():
            raise MalformedRow(f"{path} row {r + 2}: empty label for id {iid!r}")
        pairs.append((iid, lbl))
    return LabelTable.from_pairs(pairs)


# -- predictions ----------------------------------------------------------

def save_predictions(path, ids, labels, posteriors) -> None:
    """Write ``id,predicted_label,p_1,...,p_K``; empty ids -> header-only file.

    Posterior rows must sum to 1 within 1e-9.
    """
    post = np.asarray(posteriors, dtype=np.float64)
    ids = list(ids)
    labels = list(labels)
    if post.size == 0:
        post = post.reshape(0, post.shape[1] if post.ndim == 2 else 0)
    if len(ids) != len(labels) or len(ids) != post.shape[0]:
        raise ValueError(
            f"length mismatch: {len(ids)} ids, {len(labels)} labels, {post.shape[0]} posterior rows"
        )
    if post.shape[0] and np.any(np.abs(post.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("posterior rows must sum to 1 within 1e-9")
    k = post.shape[1]
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id", "predicted_label"] + [f"p_{c + 1}" for c in range(k)])
            for iid, lbl, row in zip(ids, labels, post):
                writer.writerow([iid, lbl] + [fmt_float(x) for x in row])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_predictions(path) -> tuple[list[str], list[str], np.ndarray]:
    """Read a predictions CSV back; returns (ids, labels, posteriors)."""
    rows = _read_rows(path)
    if not rows:
        raise EmptyFile(f"{path}: file is empty")
    header = rows[0]
    if len(header) < 2 or header[0] != "id" or header[1] != "predicted_label":
        raise MalformedRow(f"{path}: header must be id,predicted_label,p_1,...")
    k = len(header) - 2
    ids: list[str] = []
    labels: list[str] = []
    post = np.empty((len(rows) - 1, k), dtype=np.float64)
    seen: set[str] = set()
    for r, row in enumerate(rows[1:]):
        if len(row) != k + 2:
            raise MalformedRow(f"{path} row {r + 2}: expected {k + 2} fields")
        if row[0] in seen:
            raise DuplicateId(f"{path}: duplicate id {row[0]!r}")
        seen.add(row[0])
        ids.append(row[0])
        labels.append(row[1])
        try:
            post[r] = [float(t) for t in row[2:]]
        except ValueError:
            raise MalformedRow(f"{path} row {r + 2}: non-numeric probability") from None
    return ids, labels, post


def save_features(path, fm: FeatureMatrix) -> None:
    """Write a FeatureMatrix in the features CSV format."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id"] + [f"f{c}" for c in range(fm.d)])
            for iid, row in zip(fm.ids, fm.values):
                writer.writerow([iid] + [fmt_float(x) for x in row])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def save_labels(path, pairs) -> None:
    """Write (id, label-string) pairs in the labels CSV format."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id", "label"])
            for iid, lbl in pairs:
                writer.writerow([iid, lbl])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
