"""seedlabel: budgeted seed-set selection and exemplar-driven weak labeling.

Select the most representative or diverse subset of an unlabeled feature
pool by greedy submodular maximization, turn the expert-annotated subset
into continuous labeling functions, and aggregate their votes with a
generative consensus model to label the whole pool.
"""

from ._kernels import active_backend
from .cage import (
    CageParams,
    Posterior,
    TrainConfig,
    TrainResult,
    grad_log_likelihood,
    log_likelihood,
    log_psi_pi,
    log_psi_theta,
    log_z_theta,
    posterior,
    train,
)
from .data import (
    FeatureMatrix,
    LabelTable,
    load_features,
    load_labels,
    load_predictions,
    save_features,
    save_labels,
    save_predictions,
)
from .labelers import ExemplarLF, LFMatrix, apply_all, apply_lf, make_lfs
from .pipeline import (
    EvalReport,
    PipelineConfig,
    SyntheticSpec,
    evaluate,
    gen_synthetic,
    run_experiment_grid,
    run_label,
    run_predict,
    run_select,
)
from .select import (
    GreedyState,
    SelectionResult,
    SubmodularObjective,
    fl_gain,
    fl_value,
    greedy_select,
    logdet_gain,
    logdet_value,
)
from .similarity import (
    SimilarityMatrix,
    build_similarity_matrix,
    raw_similarity,
    to_unit_interval,
)

__version__ = "0.1.0"

__all__ = [
    "CageParams",
    "EvalReport",
    "ExemplarLF",
    "FeatureMatrix",
    "GreedyState",
    "LFMatrix",
    "LabelTable",
    "PipelineConfig",
    "Posterior",
    "SelectionResult",
    "SimilarityMatrix",
    "SubmodularObjective",
    "SyntheticSpec",
    "TrainConfig",
    "TrainResult",
    "active_backend",
    "apply_all",
    "apply_lf",
    "build_similarity_matrix",
    "evaluate",
    "fl_gain",
    "fl_value",
    "gen_synthetic",
    "grad_log_likelihood",
    "greedy_select",
    "load_features",
    "load_labels",
    "load_predictions",
    "log_likelihood",
    "log_psi_pi",
    "log_psi_theta",
    "log_z_theta",
    "logdet_gain",
    "logdet_value",
    "make_lfs",
    "posterior",
    "raw_similarity",
    "run_experiment_grid",
    "run_label",
    "run_predict",
    "run_select",
    "save_features",
    "save_labels",
    "save_predictions",
    "to_unit_interval",
    "train",
]
