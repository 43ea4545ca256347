import numpy as np

from seedlabel.data import FeatureMatrix
from seedlabel.labelers import LFMatrix
from seedlabel.similarity import SimilarityMatrix, build_similarity_matrix


def make_features(n, d, seed=0):
    rng = np.random.default_rng(seed)
    return FeatureMatrix(
        ids=tuple(f"i{k}" for k in range(n)),
        values=rng.standard_normal((n, d)),
    )


def make_similarity(n, seed=0, kernel="pearson", d=None):
    """A genuine pipeline-built similarity matrix (symmetric, PSD + unit diagonal)."""
    return build_similarity_matrix(make_features(n, d or n + 3, seed), kernel)


def raw_matrix(values, kernel="pearson"):
    """Wrap explicit values as a SimilarityMatrix with synthetic ids."""
    values = np.asarray(values, dtype=np.float64)
    return SimilarityMatrix(
        ids=tuple(f"i{k}" for k in range(values.shape[0])),
        values=values,
        kernel=kernel,
    )


def make_lf_matrix(m, b, K, seed=0, abstain_p=0.0):
    """Random vote/score matrix with at least one voter per class when b >= K."""
    rng = np.random.default_rng(seed)
    classes = np.concatenate(
        [np.arange(1, K + 1), 1 + rng.integers(0, K, size=max(0, b - K))]
    )[:b]
    if b < K:
        classes = 1 + rng.integers(0, K, size=b)
    tau = np.where(rng.random((m, b)) < abstain_p, 0, classes[None, :])
    s = rng.uniform(0.05, 0.95, size=(m, b))
    return LFMatrix(
        ids=tuple(f"u{k}" for k in range(m)),
        tau=tau.astype(np.int64),
        s=s,
        lf_classes=tuple(int(c) for c in classes),
        K=K,
    )
