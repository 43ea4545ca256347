"""Generative consensus model over labeling-function votes (CAGE).

The model couples each voter j and candidate class y through two potentials:
a firing potential exp(theta[j, y]) applied whenever the voter does not
abstain, and a Beta density over the voter's score whose shape parameters
depend on whether the voter's class matches y.  With per-voter quality guess
q_j and positive scale pi[j, y]:

    agreement     Beta(s; q_j * pi,       (1 - q_j) * pi)
    disagreement  Beta(s; (1 - q_j) * pi, q_j * pi)

Training maximizes the log-likelihood of the observed votes and scores with
the true label marginalized out, by full-batch gradient ascent in the
unconstrained coordinates (theta, rho) where pi = exp(rho).  Beta densities
are fully normalized (log-gamma normalizer included): agreement and
disagreement use different shapes, so the normalizers do not cancel across
classes.  All densities are evaluated in log space via log-gamma.

Class indices are 1..K everywhere; 0 is the abstain vote.  Posterior rows
are normalized with a sorted-summand denominator so that permuting class
indices permutes posterior columns bitwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, expit, gammaln

from . import _kernels
from .data import check_seed
from .errors import DivergedTraining, InputError, IoFailure, NonFiniteDensity
from .labelers import LFMatrix


@dataclass(frozen=True, eq=False)
class CageParams:
    """Model parameters: theta and rho are b x K grids, qc a length-b vector.

    pi = exp(rho) keeps every Beta scale positive without constraints.
    """

    theta: np.ndarray
    rho: np.ndarray
    qc: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=np.float64)
        rho = np.asarray(self.rho, dtype=np.float64)
        qc = np.asarray(self.qc, dtype=np.float64)
        if theta.ndim != 2 or theta.shape != rho.shape or qc.shape != (theta.shape[0],):
            raise ValueError(
                f"inconsistent parameter shapes: theta {theta.shape}, rho {rho.shape}, qc {qc.shape}"
            )
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(rho))):
            raise ValueError("theta and rho must be finite")
        if np.any(qc <= 0.0) or np.any(qc >= 1.0):
            raise ValueError("quality guesses must lie strictly inside (0, 1)")
        for arr in (theta, rho, qc):
            arr.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "qc", qc)

    @property
    def b(self) -> int:
        return self.theta.shape[0]

    @property
    def K(self) -> int:
        return self.theta.shape[1]

    @property
    def pi(self) -> np.ndarray:
        return np.exp(self.rho)

    @classmethod
    def initial(cls, b: int, K: int, qc_default: float = 0.85, qc=None) -> "CageParams":
        """Symmetric start: theta = 0, pi = 1, uniform quality guesses."""
        if qc is None:
            qc = np.full(b, qc_default, dtype=np.float64)
        return cls(theta=np.zeros((b, K)), rho=np.zeros((b, K)), qc=np.asarray(qc, dtype=np.float64))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 100
    qc_default: float = 0.85
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InputError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise InputError(f"epochs must be at least 1, got {self.epochs}")
        if not 0.0 < self.qc_default < 1.0:
            raise InputError(f"qc_default must lie in (0, 1), got {self.qc_default}")
        check_seed(self.seed)


@dataclass(frozen=True, eq=False)
class Posterior:
    """Row-stochastic class probabilities plus argmax predictions (1..K)."""

    ids: tuple[str, ...]
    probs: np.ndarray
    predicted: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))


@dataclass(frozen=True, eq=False)
class TrainResult:
    params: CageParams
    ll_trace: tuple[float, ...]
    config: TrainConfig


# -- potentials -------------------------------------------------------------

def log_psi_theta(theta: np.ndarray, j: int, tau_ij: int, y: int) -> float:
    """Log firing potential: theta[j, y] when the voter fires, else 0."""
    if tau_ij == 0:
        return 0.0
    return float(theta[j, y - 1])


def _check_score(s_ij: float) -> float:
    if not (0.0 < s_ij < 1.0) or not math.isfinite(s_ij):
        raise NonFiniteDensity(f"score {s_ij!r} outside (0, 1); clamp it upstream")
    return float(s_ij)


def _log_beta_density(s: float, alpha: float, beta: float) -> float:
    return (
        (alpha - 1.0) * math.log(s)
        + (beta - 1.0) * math.log1p(-s)
        - float(gammaln(alpha) + gammaln(beta) - gammaln(alpha + beta))
    )


def log_psi_pi(params: CageParams, j: int, k_j: int, tau_ij: int, s_ij: float, y: int) -> float:
    """Log score potential: a normalized Beta log-density, 0 on abstain.

    ``k_j`` is the class of voter ``j``; agreement shapes apply when
    k_j == y, disagreement shapes otherwise.
    """
    if tau_ij == 0:
        return 0.0
    s = _check_score(s_ij)
    q = float(params.qc[j])
    pi = float(np.exp(params.rho[j, y - 1]))
    if k_j == y:
        alpha, beta = q * pi, (1.0 - q) * pi
    else:
        alpha, beta = (1.0 - q) * pi, q * pi
    return _log_beta_density(s, alpha, beta)


def log_z_theta(theta: np.ndarray) -> float:
    """log of Z = sum_y prod_j (1 + exp(theta[j, y])), computed stably."""
    theta = np.asarray(theta, dtype=np.float64)
    t = np.logaddexp(0.0, theta).sum(axis=0)
    return float(_logsumexp(t))


def _logsumexp(a: np.ndarray) -> np.ndarray:
    m = np.max(a, axis=-1, keepdims=True)
    return (m + np.log(np.exp(a - m).sum(axis=-1, keepdims=True))).squeeze(-1)


def _softmax_rows(g: np.ndarray) -> np.ndarray:
    e = np.exp(g - np.max(g, axis=-1, keepdims=True))
    # Sorted-summand denominator: bitwise invariant under column permutation.
    denom = np.sort(e, axis=-1).sum(axis=-1, keepdims=True)
    return e / denom


def _beta_grids(params: CageParams, lf_classes) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Agreement/disagreement mixing coefficients and Beta shapes per (j, y)."""
    b, K = params.theta.shape
    classes = np.asarray(lf_classes, dtype=np.int64)
    agree = classes[:, None] == np.arange(1, K + 1)[None, :]
    c1 = np.where(agree, params.qc[:, None], 1.0 - params.qc[:, None])
    c2 = 1.0 - c1
    pi = params.pi
    return c1, c2, pi


def _evidence(params: CageParams, lfm: LFMatrix):
    """Per-instance per-class log joint potential (up to the Z normalizer)."""
    if lfm.b != params.b or lfm.K != params.K:
        raise InputError(
            f"LF matrix ({lfm.b} voters, K={lfm.K}) does not match params "
            f"({params.b} voters, K={params.K})"
        )
    c1, c2, pi = _beta_grids(params, lfm.lf_classes)
    alpha = c1 * pi
    beta = c2 * pi
    lg_norm = gammaln(alpha) + gammaln(beta) - gammaln(alpha + beta)
    const = params.theta - lg_norm
    fire = (lfm.tau != 0).astype(np.float64)
    ls = np.log(lfm.s)
    l1s = np.log1p(-lfm.s)
    g = _kernels.evidence_logits(fire, ls, l1s, const, alpha - 1.0, beta - 1.0)
    return g, fire, ls, l1s, (c1, c2, alpha, beta)


def log_likelihood(params: CageParams, lfm: LFMatrix) -> float:
    """Marginal log-likelihood of the observed votes and scores.

    sum_i log sum_y exp(g[i, y]) - m * log Z_theta, where g accumulates the
    log firing and log Beta potentials over voters.
    """
    g, *_ = _evidence(params, lfm)
    if lfm.m == 0:
        return 0.0
    return float(_logsumexp(g).sum() - lfm.m * log_z_theta(params.theta))


def grad_log_likelihood(params: CageParams, lfm: LFMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of ``log_likelihood`` in (theta, rho) coordinates.

    The rho part chains through pi = exp(rho) and the Beta log-normalizer
    (digamma terms).
    """
    g, fire, ls, l1s, (c1, c2, alpha, beta) = _evidence(params, lfm)
    p = _softmax_rows(g) if lfm.m else np.zeros((0, params.K))

    t = np.logaddexp(0.0, params.theta).sum(axis=0)
    w = _softmax_rows(t[None, :])[0]
    d_theta = fire.T @ p - lfm.m * (w[None, :] * expit(params.theta))

    # d/dpi of the Beta log-density, split into a score part and a
    # digamma part that does not depend on the instance.
    dig = c1 * digamma(alpha) + c2 * digamma(beta) - digamma(alpha + beta)
    d_pi = c1 * ((fire * ls).T @ p) + c2 * ((fire * l1s).T @ p) - dig * (fire.T @ p)
    d_rho = d_pi * params.pi
    return d_theta, d_rho


def train(lfm: LFMatrix, cfg: TrainConfig | None = None, qc=None) -> TrainResult:
    """Full-batch gradient ascent from the symmetric start.

    The step is the gradient of the mean per-instance log-likelihood
    (i.e. grad / m) scaled by the learning rate, so the step size does not
    grow with the pool.  ``ll_trace[e]`` records the objective at the start
    of epoch e; deterministic given the config.
    """
    cfg = cfg or TrainConfig()
    if lfm.m < 1 or lfm.b < 1:
        raise InputError(f"training needs at least one instance and one voter, got m={lfm.m}, b={lfm.b}")
    if lfm.K < 2:
        raise InputError(f"training needs K >= 2 classes, got K={lfm.K}")
    params = CageParams.initial(lfm.b, lfm.K, cfg.qc_default, qc=qc)
    step = cfg.learning_rate / lfm.m
    trace = []
    # Divergence is detected through the finiteness check, so the transient
    # overflow warnings on the way there are noise.
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(cfg.epochs):
            ll = log_likelihood(params, lfm)
            if not math.isfinite(ll):
                raise DivergedTraining(
                    f"log-likelihood became non-finite after {len(trace)} epochs"
                )
            trace.append(ll)
            d_theta, d_rho = grad_log_likelihood(params, lfm)
            if not (np.all(np.isfinite(d_theta)) and np.all(np.isfinite(d_rho))):
                raise DivergedTraining(
                    f"gradient became non-finite after {len(trace)} epochs"
                )
            params = CageParams(
                theta=params.theta + step * d_theta,
                rho=params.rho + step * d_rho,
                qc=params.qc,
            )
    return TrainResult(params=params, ll_trace=tuple(trace), config=cfg)


def posterior(params: CageParams, lfm: LFMatrix) -> Posterior:
    """P(y | votes, scores) per instance; Z_theta cancels in the conditional.

    Rows are normalized in log space; an all-abstain row carries no evidence
    and comes out exactly uniform.  Predictions break ties toward the lowest
    class index.
    """
    g, *_ = _evidence(params, lfm)
    probs = _softmax_rows(g) if lfm.m else np.zeros((0, params.K))
    predicted = probs.argmax(axis=1) + 1 if lfm.m else np.zeros(0, dtype=np.int64)
    return Posterior(ids=lfm.ids, probs=probs, predicted=predicted.astype(np.int64))


# -- params JSON --------------------------------------------------------------

def save_params(path, result: TrainResult) -> None:
    params = result.params
    doc = {
        "K": params.K,
        "b": params.b,
        "theta": [[float(x) for x in row] for row in params.theta],
        "rho": [[float(x) for x in row] for row in params.rho],
        "qc": [float(x) for x in params.qc],
        "train_config": {
            "learning_rate": result.config.learning_rate,
            "epochs": result.config.epochs,
            "qc_default": result.config.qc_default,
            "seed": result.config.seed,
        },
        "ll_trace": [float(x) for x in result.ll_trace],
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_params(path) -> TrainResult:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid params JSON: {exc}") from exc
    try:
        params = CageParams(
            theta=np.asarray(doc["theta"], dtype=np.float64).reshape(doc["b"], doc["K"]),
            rho=np.asarray(doc["rho"], dtype=np.float64).reshape(doc["b"], doc["K"]),
            qc=np.asarray(doc["qc"], dtype=np.float64),
        )
        cfg = TrainConfig(**doc["train_config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed params file: {exc}") from exc
    return TrainResult(params=params, ll_trace=tuple(doc.get("ll_trace", ())), config=cfg)
