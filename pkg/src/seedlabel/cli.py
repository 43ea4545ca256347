"""Command-line interface.

Subcommands mirror the two-phase workflow plus the desk-scale harness:

    gen-synth   write a deterministic synthetic features/truth pair
    ingest      validate a features CSV (optionally prebuild the similarity cache)
    select      pick a seed set, write manifest + annotation template
    label       turn a filled template into trained params + predictions
    predict     re-apply saved params/voters to a feature pool
    evaluate    score a predictions file against ground truth
    grid        sweep objectives x budgets over seeded repeats

Exit codes: 0 success, 1 runtime or model error, 2 usage or precondition
error.  Every subcommand accepts ``--config FILE`` with ``key = value``
lines (keys are the long flag names without dashes, e.g. ``budget = 20``);
explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import load_features
from .errors import InputError, SeedLabelError
from .pipeline import (
    OBJECTIVE_SHORT,
    PipelineConfig,
    SyntheticSpec,
    evaluate_files,
    parse_objective,
    run_experiment_grid,
    run_label,
    run_predict,
    run_select,
    write_grid_csv,
    write_synthetic,
)
from .similarity import build_similarity_matrix, save_similarity_cache

_DEFAULTS = {
    "objective": "fl",
    "budget": 10,
    "kernel": "pearson",
    "abstain-threshold": -1.0,
    "qc": 0.85,
    "lr": 0.01,
    "epochs": 100,
    "seed": 0,
    "epsilon": 1e-4,
    "n-per-class": 200,
    "dim": 16,
    "separation": 6.0,
    "noise": 1.0,
    "objectives": "fl,logdet,random",
    "budgets": "10,20,30,40",
    "repeats": 5,
}

_CASTS = {
    "budget": int,
    "epochs": int,
    "seed": int,
    "n-per-class": int,
    "dim": int,
    "repeats": int,
    "abstain-threshold": float,
    "qc": float,
    "lr": float,
    "epsilon": float,
    "separation": float,
    "noise": float,
}


def _read_config(path) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise InputError(f"{path} line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


class _Options:
    """Flag > config file > built-in default resolution."""

    def __init__(self, args: argparse.Namespace):
        self._args = args
        self._config = _read_config(args.config) if getattr(args, "config", None) else {}
        unknown = set(self._config) - set(_DEFAULTS)
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def get(self, key: str):
        flag_value = getattr(self._args, key.replace("-", "_"), None)
        if flag_value is not None:
            return flag_value
        cast = _CASTS.get(key, str)
        if key in self._config:
            try:
                return cast(self._config[key])
            except ValueError as exc:
                raise InputError(f"config key {key!r}: {exc}") from exc
        return _DEFAULTS[key]


def _pipeline_config(opts: _Options, args) -> PipelineConfig:
    return PipelineConfig(
        features=Path(args.features),
        out_dir=Path(args.out),
        objective=parse_objective(opts.get("objective")),
        budget=opts.get("budget"),
        kernel=opts.get("kernel"),
        epsilon=opts.get("epsilon"),
        abstain_threshold=opts.get("abstain-threshold"),
        qc=opts.get("qc"),
        learning_rate=opts.get("lr"),
        epochs=opts.get("epochs"),
        seed=opts.get("seed"),
        cache=Path(args.cache) if getattr(args, "cache", None) else None,
    )


def _add_common(p: argparse.ArgumentParser, *names: str) -> None:
    spec = {
        "config": (str, "key = value config file; flags win"),
        "objective": (str, "fl | logdet | random"),
        "budget": (int, "number of instances to annotate"),
        "kernel": (str, "pearson | cosine"),
        "abstain-threshold": (float, "raw-score abstain threshold in [-1, 1]; -1 never abstains"),
        "qc": (float, "per-voter quality guess in (0, 1)"),
        "lr": (float, "gradient-ascent learning rate"),
        "epochs": (int, "training epochs"),
        "seed": (int, "RNG seed"),
        "epsilon": (float, "log-determinant diagonal regularizer"),
        "out": (str, "output directory"),
        "cache": (str, "similarity cache file to reuse or create"),
    }
    for name in names:
        typ, help_text = spec[name]
        required = name == "out"
        p.add_argument(f"--{name}", type=typ, default=None, required=required, help=help_text)


def _cmd_gen_synth(args) -> int:
    opts = _Options(args)
    spec = SyntheticSpec(
        n_per_class=opts.get("n-per-class"),
        d=opts.get("dim"),
        separation=opts.get("separation"),
        noise=opts.get("noise"),
        seed=opts.get("seed"),
    )
    features_path, truth_path = write_synthetic(args.out, spec)
    print(f"wrote {features_path} and {truth_path}")
    return 0


def _cmd_ingest(args) -> int:
    opts = _Options(args)
    fm = load_features(args.features)
    print(f"{args.features}: {fm.n} instances x {fm.d} features")
    print(f"ids: {fm.ids[0]} .. {fm.ids[-1]}")
    if args.cache:
        sm = build_similarity_matrix(fm, opts.get("kernel"))
        save_similarity_cache(args.cache, sm)
        print(f"similarity cache ({sm.kernel}) written to {args.cache}")
    return 0


def _cmd_select(args) -> int:
    opts = _Options(args)
    cfg = _pipeline_config(opts, args)
    result = run_select(cfg)
    out = Path(args.out)
    print(f"selected {len(result.ids)} ids with {result.objective_kind}")
    print(f"manifest: {out / 'manifest.json'}")
    print(f"template: {out / 'template.csv'} (fill the label column)")
    return 0


def _cmd_label(args) -> int:
    opts = _Options(args)
    cfg = _pipeline_config(opts, args)
    manifest = Path(args.manifest) if args.manifest else Path(args.template).parent / "manifest.json"
    result = run_label(cfg, args.template, manifest)
    print(f"labeled {len(result.unlabeled_ids)} instances")
    print(f"predictions: {result.predictions_path}")
    print(f"params: {result.params_path}")
    return 0


def _cmd_predict(args) -> int:
    path = run_predict(args.features, args.params, args.lfs, args.out)
    print(f"predictions: {path}")
    return 0


def _cmd_evaluate(args) -> int:
    report = evaluate_files(args.predictions, args.truth)
    print(f"accuracy: {report.accuracy:.4f} over {report.m_eval} instances")
    for i, name in enumerate(report.label_names):
        print(
            f"  {name}: precision {report.precision[i]:.4f} "
            f"recall {report.recall[i]:.4f}"
        )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report.as_dict(), fh, indent=2)
            fh.write("\n")
        print(f"report: {args.out}")
    return 0


def _cmd_grid(args) -> int:
    opts = _Options(args)
    objectives = [o.strip() for o in str(opts.get("objectives")).split(",") if o.strip()]
    budgets = [int(b) for b in str(opts.get("budgets")).split(",") if b.strip()]
    synthetic = None
    fm = truth_pairs = None
    if args.features:
        if not args.truth:
            raise InputError("grid over a features file needs --truth")
        from .pipeline import _load_truth_pairs

        fm = load_features(args.features)
        truth_pairs = _load_truth_pairs(args.truth)
        features_for_cfg = Path(args.features)
    else:
        synthetic = SyntheticSpec(
            n_per_class=opts.get("n-per-class"),
            d=opts.get("dim"),
            separation=opts.get("separation"),
            noise=opts.get("noise"),
            seed=opts.get("seed"),
        )
        features_for_cfg = Path("synthetic")
    cfg = PipelineConfig(
        features=features_for_cfg,
        out_dir=Path(args.out),
        kernel=opts.get("kernel"),
        epsilon=opts.get("epsilon"),
        abstain_threshold=opts.get("abstain-threshold"),
        qc=opts.get("qc"),
        learning_rate=opts.get("lr"),
        epochs=opts.get("epochs"),
        seed=opts.get("seed"),
    )
    rows = run_experiment_grid(
        objectives,
        budgets,
        opts.get("repeats"),
        cfg,
        synthetic=synthetic,
        fm=fm,
        truth_pairs=truth_pairs,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid_path = out / "grid.csv"
    write_grid_csv(grid_path, rows)
    print(f"grid results: {grid_path}")
    print(f"{'objective':<10} " + " ".join(f"b={b:<6}" for b in sorted(set(budgets))))
    for objective in objectives:
        short = OBJECTIVE_SHORT[parse_objective(objective)]
        medians = [
            row.accuracy
            for row in rows
            if row.objective == short and row.seed == "median"
        ]
        print(f"{short:<10} " + " ".join(f"{m:.4f}  " for m in medians))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seedlabel",
        description="Budgeted seed-set selection and exemplar-driven labeling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="write a synthetic features/truth pair")
    p.add_argument("--n-per-class", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--separation", type=float, default=None)
    p.add_argument("--noise", type=float, default=None)
    _add_common(p, "config", "seed", "out")
    p.set_defaults(func=_cmd_gen_synth)

    p = sub.add_parser("ingest", help="validate a features CSV")
    p.add_argument("--features", required=True)
    _add_common(p, "config", "kernel", "cache")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("select", help="pick the seed set to annotate")
    p.add_argument("--features", required=True)
    _add_common(p, "config", "objective", "budget", "kernel", "seed", "epsilon", "cache", "out")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("label", help="train on a filled template and predict")
    p.add_argument("--features", required=True)
    p.add_argument("--template", required=True, help="filled annotation template CSV")
    p.add_argument("--manifest", default=None, help="selection manifest (default: next to template)")
    _add_common(
        p, "config", "kernel", "abstain-threshold", "qc", "lr", "epochs", "seed", "out"
    )
    p.set_defaults(func=_cmd_label)

    p = sub.add_parser("predict", help="apply saved params and voters to a pool")
    p.add_argument("--features", required=True)
    p.add_argument("--params", required=True, help="params JSON from a label run")
    p.add_argument("--lfs", required=True, help="voter sidecar JSON from a label run")
    _add_common(p, "config", "out")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--predictions", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out", default=None, help="optional JSON report path")
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("grid", help="objective x budget accuracy sweep")
    p.add_argument("--features", default=None, help="pool CSV (default: synthetic)")
    p.add_argument("--truth", default=None, help="ground-truth labels for --features")
    p.add_argument("--objectives", type=str, default=None, help="comma list, e.g. fl,logdet,random")
    p.add_argument("--budgets", type=str, default=None, help="comma list, e.g. 10,20,30,40")
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--n-per-class", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--separation", type=float, default=None)
    p.add_argument("--noise", type=float, default=None)
    _add_common(
        p, "config", "kernel", "abstain-threshold", "qc", "lr", "epochs", "seed", "epsilon", "out"
    )
    p.set_defaults(func=_cmd_grid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SeedLabelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
