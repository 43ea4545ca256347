"""Budgeted subset selection by greedy submodular maximization.

Two monotone objectives over a unit-interval similarity matrix S:

* facility location, f(A) = sum_i max_{j in A} S[i, j], rewards subsets whose
  members cover the whole pool (representativeness);
* log determinant, f(A) = log det(S_A + eps*I), rewards mutually dissimilar
  members (diversity), kept well-posed by the diagonal regularizer eps.

Plus a seeded uniform ``random_baseline``.  Greedy adds the item with the
largest marginal gain until the budget is spent, breaking ties by lowest row
index.  Facility location defaults to lazy (priority-queue) greedy, whose
output is guaranteed identical to the exhaustive scan: stale bounds stay
valid because gains only shrink as the coverage vector grows, even in
floating point, and the backend computes single-column gains bitwise equal
to full-scan gains.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from . import _kernels
from .data import check_seed
from .errors import (
    AlreadySelected,
    BudgetExceedsPool,
    BudgetZero,
    InputError,
    IoFailure,
    NotPositiveDefinite,
)
from .similarity import SimilarityMatrix

FACILITY_LOCATION = "facility_location"
LOG_DETERMINANT = "log_determinant"
RANDOM_BASELINE = "random_baseline"
OBJECTIVE_KINDS = (FACILITY_LOCATION, LOG_DETERMINANT, RANDOM_BASELINE)


@dataclass(frozen=True)
class SubmodularObjective:
    """An objective kind bound to its similarity matrix (or bare id pool)."""

    kind: str
    S: SimilarityMatrix | None = None
    epsilon: float = 1e-4
    pool_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise InputError(f"unknown objective {self.kind!r}; choose from {OBJECTIVE_KINDS}")
        if self.kind == LOG_DETERMINANT and not self.epsilon > 0:
            raise InputError(f"log-determinant regularizer must be positive, got {self.epsilon}")
        if self.kind != RANDOM_BASELINE and self.S is None:
            raise InputError(f"objective {self.kind!r} requires a similarity matrix")
        if self.S is None and self.pool_ids is None:
            raise InputError("random baseline needs a similarity matrix or pool_ids")

    @property
    def ids(self) -> tuple[str, ...]:
        return self.S.ids if self.S is not None else tuple(self.pool_ids)

    @property
    def n(self) -> int:
        return len(self.ids)


class GreedyState:
    """Incremental accumulator for one greedy run.

    Facility location keeps the per-instance running coverage max; log
    determinant keeps the lower Cholesky factor of S_A + eps*I.  ``add``
    appends an item and returns its marginal gain.
    """

    def __init__(self, objective: SubmodularObjective):
        if objective.kind == RANDOM_BASELINE:
            raise InputError("the random baseline has no greedy state")
        self.objective = objective
        self.selected: list[str] = []
        self.selected_idx: list[int] = []
        self.objective_trace: list[float] = []
        self.fl_max = np.zeros(objective.n, dtype=np.float64)
        self.chol = np.zeros((0, 0), dtype=np.float64)

    @property
    def S(self) -> SimilarityMatrix:
        return self.objective.S

    def _check_new(self, j: str) -> int:
        idx = self.S.index_of(j)
        if idx in self.selected_idx:
            raise AlreadySelected(f"id {j!r} is already selected")
        return idx

    def add(self, j: str) -> float:
        idx = self._check_new(j)
        if self.objective.kind == FACILITY_LOCATION:
            gain = float(_kernels.fl_gain_col(self.S.values, self.fl_max, idx))
            self.fl_max = np.maximum(self.fl_max, self.S.values[idx])
        else:
            gain, w, root = self._logdet_gain_idx(idx)
            k = self.chol.shape[0]
            grown = np.zeros((k + 1, k + 1), dtype=np.float64)
            grown[:k, :k] = self.chol
            grown[k, :k] = w
            grown[k, k] = root
            self.chol = grown
        prev = self.objective_trace[-1] if self.objective_trace else 0.0
        self.selected.append(j)
        self.selected_idx.append(idx)
        self.objective_trace.append(prev + gain)
        return gain

    def _logdet_gain_idx(self, idx: int):
        eps = self.objective.epsilon
        diag = self.S.values[idx, idx] + eps
        if not self.selected_idx:
            if diag <= 0:
                raise NotPositiveDefinite(f"diagonal pivot {diag} <= 0 for id index {idx}")
            return float(np.log(diag)), np.zeros(0), float(np.sqrt(diag))
        col = self.S.values[self.selected_idx, idx]
        w = solve_triangular(self.chol, col, lower=True)
        schur = diag - float(w @ w)
        if schur <= 0:
            raise NotPositiveDefinite(
                f"Schur complement {schur} <= 0 adding index {idx}; "
                "increase epsilon for near-duplicate-heavy pools"
            )
        return float(np.log(schur)), w, float(np.sqrt(schur))


# -- objective values and gains (public operations) -------------------------

def _resolve(S: SimilarityMatrix, ids) -> list[int]:
    return [S.index_of(i) for i in ids]


def fl_value(S: SimilarityMatrix, ids) -> float:
    """Facility-location value of a subset; the empty max is defined as 0."""
    idx = _resolve(S, ids)
    if not idx:
        return 0.0
    return float(S.values[:, idx].max(axis=1).sum())


def fl_gain(state: GreedyState, j: str) -> float:
    """Marginal facility-location gain of adding ``j`` to the state."""
    idx = state._check_new(j)
    return float(_kernels.fl_gain_col(state.S.values, state.fl_max, idx))


def logdet_value(S: SimilarityMatrix, ids, epsilon: float = 1e-4) -> float:
    """log det(S_A + eps*I) via Cholesky; 0 for the empty set."""
    idx = _resolve(S, ids)
    if not idx:
        return 0.0
    sub = S.values[np.ix_(idx, idx)] + epsilon * np.eye(len(idx))
    try:
        chol = np.linalg.cholesky(sub)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(
            "similarity submatrix is not positive definite; increase epsilon"
        ) from None
    return float(2.0 * np.log(np.diagonal(chol)).sum())


def logdet_gain(state: GreedyState, j: str) -> float:
    """Marginal log-determinant gain of adding ``j`` to the state."""
    idx = state._check_new(j)
    gain, _, _ = state._logdet_gain_idx(idx)
    return gain


# -- greedy maximizer -------------------------------------------------------

@dataclass(frozen=True)
class SelectionResult:
    """Ordered selection with its per-step gains and objective trace."""

    ids: tuple[str, ...]
    objective_kind: str
    budget: int
    seed: int
    gains: tuple[float, ...] | None = None
    objective_trace: tuple[float, ...] | None = None
    kernel: str | None = None
    epsilon: float | None = None


def greedy_select(
    objective: SubmodularObjective,
    budget: int,
    seed: int = 0,
    strategy: str = "auto",
) -> SelectionResult:
    """Pick ``budget`` items; maximum marginal gain, ties to lowest row index.

    ``strategy`` applies to facility location only: "lazy" (default under
    "auto") or "naive"; both produce identical output, the naive scan exists
    as the reference the lazy queue is tested against.
    """
    seed = check_seed(seed)
    n = objective.n
    if budget < 1:
        raise BudgetZero(f"budget must be at least 1, got {budget}")
    if budget > n:
        raise BudgetExceedsPool(f"budget {budget} exceeds pool size {n}")
    if strategy not in ("auto", "lazy", "naive"):
        raise InputError(f"unknown strategy {strategy!r}")

    common = dict(objective_kind=objective.kind, budget=budget, seed=seed)
    if objective.S is not None:
        common["kernel"] = objective.S.kernel
    if objective.kind == RANDOM_BASELINE:
        order = np.random.default_rng(seed).permutation(n)[:budget]
        return SelectionResult(ids=tuple(objective.ids[i] for i in order), **common)

    state = GreedyState(objective)
    if objective.kind == FACILITY_LOCATION:
        picks = _fl_order_lazy(objective, budget) if strategy != "naive" else _fl_order_naive(objective, budget)
        gains = [state.add(objective.ids[i]) for i in picks]
    else:
        gains = []
        for _ in range(budget):
            gains.append(state.add(objective.ids[_logdet_best(state)]))
        common["epsilon"] = objective.epsilon
    return SelectionResult(
        ids=tuple(state.selected),
        gains=tuple(gains),
        objective_trace=tuple(state.objective_trace),
        **common,
    )


def _fl_order_naive(objective: SubmodularObjective, budget: int) -> list[int]:
    S = objective.S.values
    n = objective.n
    mx = np.zeros(n, dtype=np.float64)
    picks: list[int] = []
    for _ in range(budget):
        gains = _kernels.fl_gains(S, mx)
        if picks:
            gains[picks] = -np.inf
        j = int(np.argmax(gains))
        picks.append(j)
        mx = np.maximum(mx, S[j])
    return picks


def _fl_order_lazy(objective: SubmodularObjective, budget: int) -> list[int]:
    S = objective.S.values
    n = objective.n
    mx = np.zeros(n, dtype=np.float64)
    bounds = _kernels.fl_gains(S, mx)
    # (negated bound, index, step at which the bound was computed); the heap
    # breaks exact gain ties by index, matching np.argmax's first-max rule.
    heap = [(-bounds[j], j, 0) for j in range(n)]
    heapq.heapify(heap)
    picks: list[int] = []
    while len(picks) < budget:
        neg_gain, j, stamp = heapq.heappop(heap)
        if stamp == len(picks):
            picks.append(j)
            mx = np.maximum(mx, S[j])
            continue
        fresh = _kernels.fl_gain_col(S, mx, j)
        heapq.heappush(heap, (-fresh, j, len(picks)))
    return picks


def _logdet_best(state: GreedyState) -> int:
    S = state.S.values
    n = S.shape[0]
    eps = state.objective.epsilon
    diag = np.diagonal(S) + eps
    if state.selected_idx:
        w = solve_triangular(state.chol, S[state.selected_idx, :], lower=True)
        schur = diag - (w * w).sum(axis=0)
    else:
        schur = diag.copy()
    gains = np.full(n, -np.inf)
    pos = schur > 0
    gains[pos] = np.log(schur[pos])
    if state.selected_idx:
        gains[state.selected_idx] = -np.inf
    j = int(np.argmax(gains))
    if gains[j] == -np.inf:
        raise NotPositiveDefinite(
            "no candidate keeps the regularized submatrix positive definite"
        )
    return j


# -- selection manifest ------------------------------------------------------

def save_manifest(path, result: SelectionResult) -> None:
    """Write the selection manifest JSON: ordered ids plus per-step values."""
    doc = {
        "objective": result.objective_kind,
        "budget": result.budget,
        "seed": result.seed,
        "kernel": result.kernel,
        "epsilon": result.epsilon,
        "ids": list(result.ids),
        "gains": None if result.gains is None else list(result.gains),
        "objective_trace": None
        if result.objective_trace is None
        else list(result.objective_trace),
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_manifest(path) -> SelectionResult:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid manifest JSON: {exc}") from exc
    try:
        return SelectionResult(
            ids=tuple(doc["ids"]),
            objective_kind=doc["objective"],
            budget=int(doc["budget"]),
            seed=int(doc["seed"]),
            gains=None if doc.get("gains") is None else tuple(doc["gains"]),
            objective_trace=None
            if doc.get("objective_trace") is None
            else tuple(doc["objective_trace"]),
            kernel=doc.get("kernel"),
            epsilon=doc.get("epsilon"),
        )
    except KeyError as exc:
        raise InputError(f"{path}: manifest missing key {exc}") from exc
