"""End-to-end orchestration: select a seed set, label the rest, evaluate.

The flow is two-phase because a human sits in the middle: ``run_select``
writes a selection manifest plus an annotation template CSV, the expert
fills the template offline, and ``run_label`` turns the filled template into
exemplar voters, trains the consensus model and writes posteriors for every
remaining pool instance.  ``gen_synthetic`` provides a deterministic
two-cluster stand-in dataset so the whole system is testable at desk scale,
and ``run_experiment_grid`` sweeps objectives x budgets over seeded repeats.

At every stage the pool splits as X = U (unlabeled) + L (seed set), disjoint;
accuracy is always computed over U only, since L is expert-labeled by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .cage import CageParams, TrainConfig, TrainResult, posterior, save_params, train
from .data import (
    FeatureMatrix,
    LabelTable,
    check_seed,
    fmt_float,
    load_features,
    load_predictions,
    save_features,
    save_labels,
    save_predictions,
)
from .errors import (
    EmptyFile,
    InputError,
    IoFailure,
    MalformedRow,
    MissingGroundTruth,
    UnfilledTemplate,
    UnknownId,
)
from .labelers import apply_all, empty_lf_matrix, make_lfs, save_lf_matrix
from .select import (
    FACILITY_LOCATION,
    LOG_DETERMINANT,
    OBJECTIVE_KINDS,
    RANDOM_BASELINE,
    SelectionResult,
    SubmodularObjective,
    greedy_select,
    load_manifest,
    save_manifest,
)
from .similarity import (
    SimilarityMatrix,
    build_similarity_matrix,
    load_similarity_cache,
    save_similarity_cache,
)

OBJECTIVE_ALIASES = {
    "fl": FACILITY_LOCATION,
    "logdet": LOG_DETERMINANT,
    "random": RANDOM_BASELINE,
}
OBJECTIVE_SHORT = {v: k for k, v in OBJECTIVE_ALIASES.items()}


def parse_objective(name: str) -> str:
    canon = OBJECTIVE_ALIASES.get(name, name)
    if canon not in OBJECTIVE_KINDS:
        raise InputError(f"unknown objective {name!r}; choose fl, logdet or random")
    return canon


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one select/label run needs; flags override file config."""

    features: Path
    out_dir: Path
    objective: str = FACILITY_LOCATION
    budget: int = 10
    kernel: str = "pearson"
    epsilon: float = 1e-4
    abstain_threshold: float = -1.0
    qc: float = 0.85
    learning_rate: float = 0.01
    epochs: int = 100
    seed: int = 0
    cache: Path | None = None

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            qc_default=self.qc,
            seed=self.seed,
        )


def _similarity_for(cfg: PipelineConfig, fm: FeatureMatrix) -> SimilarityMatrix:
    if cfg.cache is not None and Path(cfg.cache).exists():
        sm = load_similarity_cache(cfg.cache, fm.ids)
        if sm.kernel != cfg.kernel:
            raise InputError(
                f"cache {cfg.cache} was built with kernel {sm.kernel!r}, requested {cfg.kernel!r}"
            )
        return sm
    sm = build_similarity_matrix(fm, cfg.kernel)
    if cfg.cache is not None:
        save_similarity_cache(cfg.cache, sm)
    return sm


def run_select(cfg: PipelineConfig) -> SelectionResult:
    """Phase one: pick the seed set, write manifest + annotation template."""
    fm = load_features(cfg.features)
    objective = parse_objective(cfg.objective)
    if objective == RANDOM_BASELINE:
        obj = SubmodularObjective(kind=objective, pool_ids=fm.ids)
    else:
        obj = SubmodularObjective(kind=objective, S=_similarity_for(cfg, fm), epsilon=cfg.epsilon)
    result = greedy_select(obj, cfg.budget, cfg.seed)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_manifest(out / "manifest.json", result)
    save_labels(out / "template.csv", [(iid, "") for iid in result.ids])
    return result


def read_template(path, expected_ids) -> list[tuple[str, str]]:
    """Read a filled annotation template; every expected id must carry a label."""
    import csv

    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise EmptyFile(f"{path}: file is empty")
    if rows[0][:2] != ["id", "label"]:
        raise MalformedRow(f"{path}: header must be id,label")
    expected = list(expected_ids)
    known = set(expected)
    filled: dict[str, str] = {}
    for r, row in enumerate(rows[1:]):
        if len(row) != 2:
            raise MalformedRow(f"{path} row {r + 2}: expected 2 fields, got {len(row)}")
        iid, lbl = row
        if iid not in known:
            raise UnknownId(f"{path}: id {iid!r} is not in the selection manifest")
        filled[iid] = lbl.strip()
    missing = [i for i in expected if not filled.get(i)]
    if missing:
        raise UnfilledTemplate(
            f"{path}: {len(missing)} of {len(expected)} rows lack a label "
            f"(first: {missing[0]!r})"
        )
    return [(iid, filled[iid]) for iid in expected]


@dataclass(frozen=True, eq=False)
class LabelRunResult:
    predictions_path: Path
    params_path: Path
    lf_matrix_path: Path
    lf_sidecar_path: Path
    unlabeled_ids: tuple[str, ...]
    predicted_labels: tuple[str, ...]
    posteriors: np.ndarray
    label_names: tuple[str, ...]


def _write_label_outputs(out: Path, ids, labels, post) -> Path:
    pred_path = out / "predictions.csv"
    save_predictions(pred_path, ids, labels, post)
    return pred_path


def run_label(cfg: PipelineConfig, template_path, manifest_path) -> LabelRunResult:
    """Phase two: exemplar voters over U = X minus L, consensus, predictions."""
    fm = load_features(cfg.features)
    manifest = load_manifest(manifest_path)
    pairs = read_template(template_path, manifest.ids)
    seed_ids = list(manifest.ids)
    seed_set = set(seed_ids)
    unlabeled_ids = tuple(i for i in fm.ids if i not in seed_set)
    assert set(unlabeled_ids) | seed_set == set(fm.ids)
    assert not set(unlabeled_ids) & seed_set

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    distinct = sorted({lbl for _, lbl in pairs})
    if len(distinct) == 1:
        # Degenerate consensus: every prediction will be the one class the
        # expert used, and training is vacuous (make_lfs warns about it).
        table = LabelTable(entries={iid: 1 for iid, _ in pairs}, label_names=(distinct[0],))
    else:
        table = LabelTable.from_pairs(pairs)
    lfs = make_lfs(seed_ids, table, fm)

    if unlabeled_ids:
        pool = fm.subset(unlabeled_ids)
        lfm = apply_all(lfs, pool, table.K, cfg.kernel, cfg.abstain_threshold)
        if table.K >= 2:
            result = train(lfm, cfg.train_config())
        else:
            result = TrainResult(
                params=CageParams.initial(len(lfs), 1, cfg.qc),
                ll_trace=(),
                config=cfg.train_config(),
            )
        post = posterior(result.params, lfm)
        probs = post.probs
        labels_out = tuple(table.name_of(int(c)) for c in post.predicted)
    else:
        lfm = empty_lf_matrix(lfs, table.K)
        result = TrainResult(
            params=CageParams.initial(len(lfs), table.K, cfg.qc),
            ll_trace=(),
            config=cfg.train_config(),
        )
        probs = np.zeros((0, table.K))
        labels_out = ()

    pred_path = _write_label_outputs(out, unlabeled_ids, labels_out, probs)
    params_path = out / "params.json"
    save_params(params_path, result)
    lf_csv, lf_meta = out / "lf_matrix.csv", out / "lf_matrix.meta.json"
    save_lf_matrix(
        lf_csv,
        lf_meta,
        lfm,
        {
            "exemplar_ids": seed_ids,
            "kernel": cfg.kernel,
            "threshold": cfg.abstain_threshold,
            "label_names": table.label_names,
        },
    )
    return LabelRunResult(
        predictions_path=pred_path,
        params_path=params_path,
        lf_matrix_path=lf_csv,
        lf_sidecar_path=lf_meta,
        unlabeled_ids=unlabeled_ids,
        predicted_labels=labels_out,
        posteriors=probs,
        label_names=table.label_names,
    )


def run_predict(features_path, params_path, sidecar_path, out_dir) -> Path:
    """Re-apply saved voters and parameters to a feature pool, no retraining."""
    from .cage import load_params
    from .labelers import load_lf_sidecar

    fm = load_features(features_path)
    saved = load_params(params_path)
    meta = load_lf_sidecar(sidecar_path)
    label_names = tuple(meta["label_names"])
    if len(label_names) != saved.params.K:
        raise InputError("sidecar label_names do not match the params class count")
    exemplar_ids = list(meta["exemplar_ids"])
    classes = list(meta["lf_classes"])
    if len(exemplar_ids) != saved.params.b or len(classes) != saved.params.b:
        raise InputError("sidecar voter list does not match the params voter count")
    table = LabelTable(
        entries={iid: int(c) for iid, c in zip(exemplar_ids, classes)},
        label_names=label_names,
    )
    lfs = make_lfs(exemplar_ids, table, fm)
    pool_ids = tuple(i for i in fm.ids if i not in set(exemplar_ids))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not pool_ids:
        return _write_label_outputs(out, (), (), np.zeros((0, table.K)))
    pool = fm.subset(pool_ids)
    lfm = apply_all(lfs, pool, table.K, meta["kernel"], meta["abstain_threshold"])
    post = posterior(saved.params, lfm)
    labels_out = tuple(table.name_of(int(c)) for c in post.predicted)
    return _write_label_outputs(out, pool_ids, labels_out, post.probs)


# -- evaluation ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EvalReport:
    """Accuracy plus a truth x predicted confusion matrix over m_eval rows."""

    accuracy: float
    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    m_eval: int
    label_names: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "m_eval": self.m_eval,
            "label_names": list(self.label_names),
            "confusion": [[int(x) for x in row] for row in self.confusion],
            "precision": [float(x) for x in self.precision],
            "recall": [float(x) for x in self.recall],
        }


def evaluate(pred_pairs, truth_pairs) -> EvalReport:
    """Compare (id, label) predictions against (id, label) ground truth.

    Every predicted id must have a ground-truth label; extra truth rows are
    ignored.  Row order of either input does not matter.
    """
    truth = dict(truth_pairs)
    preds = list(pred_pairs)
    names = sorted({lbl for _, lbl in preds} | set(truth.values()))
    index = {nm: i for i, nm in enumerate(names)}
    k = len(names)
    confusion = np.zeros((k, k), dtype=np.int64)
    for iid, plbl in preds:
        if iid not in truth:
            raise MissingGroundTruth(f"no ground-truth label for predicted id {iid!r}")
        confusion[index[truth[iid]], index[plbl]] += 1
    m_eval = int(confusion.sum())
    correct = int(np.trace(confusion))
    accuracy = correct / m_eval if m_eval else 0.0
    col = confusion.sum(axis=0)
    row = confusion.sum(axis=1)
    diag = np.diagonal(confusion)
    precision = np.where(col > 0, diag / np.maximum(col, 1), 0.0)
    recall = np.where(row > 0, diag / np.maximum(row, 1), 0.0)
    return EvalReport(
        accuracy=accuracy,
        confusion=confusion,
        precision=precision,
        recall=recall,
        m_eval=m_eval,
        label_names=tuple(names),
    )


def evaluate_files(predictions_path, truth_path) -> EvalReport:
    ids, labels, _ = load_predictions(predictions_path)
    truth = _load_truth_pairs(truth_path)
    return evaluate(list(zip(ids, labels)), truth)


def _load_truth_pairs(path) -> list[tuple[str, str]]:
    import csv

    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise EmptyFile(f"{path}: file is empty")
    if rows[0][:2] != ["id", "label"]:
        raise MalformedRow(f"{path}: header must be id,label")
    out = []
    for r, row in enumerate(rows[1:]):
        if len(row) != 2:
            raise MalformedRow(f"{path} row {r + 2}: expected 2 fields")
        out.append((row[0], row[1]))
    return out


# -- synthetic data -------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    """Two Gaussian clusters separated by ``separation`` along a seeded axis."""

    n_per_class: int = 200
    d: int = 16
    separation: float = 6.0
    noise: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_per_class < 1 or self.d < 1:
            raise InputError("n_per_class and d must be at least 1")
        if not self.noise > 0:
            raise InputError(f"noise scale must be positive, got {self.noise}")
        check_seed(self.seed)


def gen_synthetic(spec: SyntheticSpec) -> tuple[FeatureMatrix, list[tuple[str, str]]]:
    """Deterministic feature pool plus (id, label) ground truth."""
    rng = np.random.default_rng(spec.seed)
    axis = rng.standard_normal(spec.d)
    axis = axis / np.linalg.norm(axis)
    offset = (spec.separation / 2.0) * axis
    n = spec.n_per_class
    width = max(4, len(str(2 * n - 1)))
    xs = []
    pairs = []
    for cls, (name, sign) in enumerate((("neg", -1.0), ("pos", 1.0))):
        pts = sign * offset + spec.noise * rng.standard_normal((n, spec.d))
        xs.append(pts)
        pairs += [(f"s{cls * n + i:0{width}d}", name) for i in range(n)]
    fm = FeatureMatrix(ids=tuple(iid for iid, _ in pairs), values=np.vstack(xs))
    return fm, pairs


def write_synthetic(out_dir, spec: SyntheticSpec) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fm, pairs = gen_synthetic(spec)
    features_path = out / "features.csv"
    truth_path = out / "truth.csv"
    save_features(features_path, fm)
    save_labels(truth_path, pairs)
    return features_path, truth_path


# -- experiment grid --------------------------------------------------------

@dataclass(frozen=True)
class GridRow:
    objective: str  # short name: fl, logdet, random
    budget: int
    seed: int | str  # an int, or "median" for the aggregate row
    accuracy: float


def _cell_accuracy(fm, truth, chosen, cfg: PipelineConfig) -> float:
    """Accuracy over U for one (selection, budget) cell; truth auto-fills L."""
    chosen = list(chosen)
    seed_set = set(chosen)
    unlabeled = [i for i in fm.ids if i not in seed_set]
    if not unlabeled:
        return 1.0
    pairs = [(iid, truth[iid]) for iid in chosen]
    distinct = {lbl for _, lbl in pairs}
    if len(distinct) == 1:
        only = next(iter(distinct))
        return float(np.mean([truth[i] == only for i in unlabeled]))
    table = LabelTable.from_pairs(pairs)
    lfs = make_lfs(chosen, table, fm)
    lfm = apply_all(lfs, fm.subset(unlabeled), table.K, cfg.kernel, cfg.abstain_threshold)
    result = train(lfm, cfg.train_config())
    post = posterior(result.params, lfm)
    predicted = [table.name_of(int(c)) for c in post.predicted]
    return float(np.mean([p == truth[i] for i, p in zip(unlabeled, predicted)]))


def run_experiment_grid(
    objectives,
    budgets,
    repeats: int,
    cfg: PipelineConfig,
    *,
    synthetic: SyntheticSpec | None = None,
    fm: FeatureMatrix | None = None,
    truth_pairs=None,
) -> list[GridRow]:
    """One accuracy row per (objective, budget, seed) plus a median row.

    With a synthetic spec the pool is regenerated per repeat seed; with a
    fixed pool only the selection seed varies.  Greedy selections are grown
    once at the largest budget and reused as prefixes, which matches the
    per-budget runs exactly because greedy orders are nested.
    """
    objectives = [parse_objective(o) for o in objectives]
    budgets = sorted(set(int(b) for b in budgets))
    if repeats < 1:
        raise InputError(f"repeats must be at least 1, got {repeats}")
    if synthetic is None and (fm is None or truth_pairs is None):
        raise InputError("grid needs either a synthetic spec or a pool with ground truth")
    bmax = max(budgets)

    acc: dict[tuple[str, int, int], float] = {}
    for r in range(repeats):
        seed = cfg.seed + r
        if synthetic is not None:
            fm_r, pairs_r = gen_synthetic(replace(synthetic, seed=seed))
        else:
            fm_r, pairs_r = fm, list(truth_pairs)
        truth = dict(pairs_r)
        if bmax > fm_r.n:
            raise InputError(f"budget {bmax} exceeds pool size {fm_r.n}")
        sm = None
        for objective in objectives:
            if objective == RANDOM_BASELINE:
                obj = SubmodularObjective(kind=objective, pool_ids=fm_r.ids)
            else:
                if sm is None:
                    sm = build_similarity_matrix(fm_r, cfg.kernel)
                obj = SubmodularObjective(kind=objective, S=sm, epsilon=cfg.epsilon)
            sel = greedy_select(obj, bmax, seed)
            for budget in budgets:
                acc[(objective, budget, seed)] = _cell_accuracy(
                    fm_r, truth, sel.ids[:budget], cfg
                )

    rows: list[GridRow] = []
    for objective in objectives:
        short = OBJECTIVE_SHORT[objective]
        for budget in budgets:
            cells = [acc[(objective, budget, cfg.seed + r)] for r in range(repeats)]
            for r in range(repeats):
                rows.append(GridRow(short, budget, cfg.seed + r, cells[r]))
            rows.append(GridRow(short, budget, "median", float(np.median(cells))))
    return rows


def write_grid_csv(path, rows) -> None:
    import csv

    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["objective", "budget", "seed", "accuracy"])
            for row in rows:
                writer.writerow([row.objective, row.budget, row.seed, fmt_float(row.accuracy)])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def grid_median(rows, objective_short: str, budget: int) -> float:
    """Median-row accuracy for one (objective, budget) cell of a grid result."""
    for row in rows:
        if row.objective == objective_short and row.budget == budget and row.seed == "median":
            return row.accuracy
    raise KeyError(f"no median row for ({objective_short}, {budget})")
