"""Entropy measures over sequence and cluster probabilities, plus calibration.

Four measures: naive entropy over per-generation probabilities, Shannon
entropy over probability-mass clusters, Shannon entropy over membership
counts, and quadratic (collision) entropy over clusters.  Calibration
maximizes the binary collision entropy of each sequence probability against
a KL anchor to its original value, weighted by that sequence's uncertainty
score, then renormalizes across the bundle and recomputes cluster
probabilities.

Values are base-10 by default; natural log is available everywhere via
``base="e"``.  Sums iterate over sorted term arrays so reordering clusters
cannot change the result even at the last bit.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from typing import Any, Sequence

import numpy as np

from semuq import _accel
from semuq.clustering import SemanticClustering, cluster_probabilities
from semuq.errors import ConvergenceWarning, ParameterError, ValidationError
from semuq.records import QuestionBundle

PROB_SUM_ATOL = 1e-6
CLIP_EPSILON = 1e-6


def normalize_base(base) -> str:
    """Accepted spellings: 10, "10", "e" (math.e also honored)."""
    if base in (10, "10", 10.0):
        return "10"
    if base in ("e", math.e):
        return "e"
    raise ParameterError(f"log base must be 10 or 'e', got {base!r}")


def _log(values: np.ndarray, base_tag: str) -> np.ndarray:
    return np.log10(values) if base_tag == "10" else np.log(values)


def _checked_probabilities(probs: Sequence[float], what: str) -> np.ndarray:
    arr = np.asarray(list(probs), dtype=float)
    if arr.size == 0:
        raise ValidationError(f"{what} must be nonempty")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise ValidationError(f"{what} must lie in [0, 1]")
    total = float(arr.sum())
    if abs(total - 1.0) > PROB_SUM_ATOL:
        raise ValidationError(f"{what} sum to {total}, not 1 (tolerance {PROB_SUM_ATOL})")
    return arr


def _clip_zeros(arr: np.ndarray, what: str) -> np.ndarray:
    if np.any(arr == 0.0):
        warnings.warn(
            f"{what} contain zero entries; clipping to {CLIP_EPSILON} for the logarithm",
            stacklevel=3,
        )
        arr = np.maximum(arr, CLIP_EPSILON)
    return arr


def _shannon(probs: Sequence[float], base, what: str) -> float:
    base_tag = normalize_base(base)
    arr = _clip_zeros(_checked_probabilities(probs, what), what)
    terms = -arr * _log(arr, base_tag)
    return float(np.sort(terms).sum())


def naive_entropy(seq_probs: Sequence[float], base=10) -> float:
    """Entropy of the normalized per-generation probabilities."""
    return _shannon(seq_probs, base, "sequence probabilities")


def shannon_semantic_entropy(cluster_probs: Sequence[float], base=10) -> float:
    """Entropy of the per-cluster probability masses."""
    return _shannon(cluster_probs, base, "cluster probabilities")


def renyi_semantic_entropy(cluster_probs: Sequence[float], base=10) -> float:
    """Collision entropy: negated log of the summed squared cluster probabilities."""
    base_tag = normalize_base(base)
    arr = _checked_probabilities(cluster_probs, "cluster probabilities")
    collision = float(np.sort(arr * arr).sum())
    return float(-_log(np.asarray(collision), base_tag))


def squared_cluster_terms(cluster_probs: Sequence[float]) -> list[float]:
    """Per-cluster squared probabilities, the audit trail for the collision entropy."""
    return [float(p) * float(p) for p in cluster_probs]


@dataclasses.dataclass
class EntropyReport:
    question_id: str
    naive_entropy: float
    shannon_semantic: float
    discrete_semantic: float
    renyi_semantic: float
    renyi_semantic_calibrated: float
    log_base: str  # "10" or "e"
    per_cluster_terms: list[float]  # squared calibrated cluster probabilities

    def to_json_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "EntropyReport":
        return cls(
            question_id=data["question_id"],
            naive_entropy=data["naive_entropy"],
            shannon_semantic=data["shannon_semantic"],
            discrete_semantic=data["discrete_semantic"],
            renyi_semantic=data["renyi_semantic"],
            renyi_semantic_calibrated=data["renyi_semantic_calibrated"],
            log_base=data["log_base"],
            per_cluster_terms=list(data["per_cluster_terms"]),
        )


@dataclasses.dataclass
class CalibrationConfig:
    """Knobs for the per-sequence entropy-maximization adjustment.

    lambda_ may be 0 (pure entropy maximization, optimum 0.5) or infinity
    (the anchor dominates and the input probability is returned exactly).
    """

    lambda_: float = 1.0
    max_iters: int = 500
    step_size: float = 0.05
    stop_delta: float = 1e-7
    clip_epsilon: float = CLIP_EPSILON

    def __post_init__(self):
        if math.isnan(self.lambda_) or self.lambda_ < 0:
            raise ParameterError(f"calibration weight must be >= 0, got {self.lambda_}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.step_size <= 0:
            raise ParameterError(f"step_size must be positive, got {self.step_size}")
        if self.stop_delta <= 0:
            raise ParameterError(f"stop_delta must be positive, got {self.stop_delta}")
        if not (0.0 < self.clip_epsilon < 0.5):
            raise ParameterError(f"clip_epsilon must lie in (0, 0.5), got {self.clip_epsilon}")

    @property
    def domain(self) -> tuple[float, float]:
        return (self.clip_epsilon, 1.0 - self.clip_epsilon)


def calibration_objective(p_hat, p: float, uq: float, lam: float):
    """The maximized objective, natural log; vectorized over p_hat.

    Binary collision entropy of p_hat minus (lam / uq) times the Bernoulli
    KL divergence of p_hat from the anchor p.
    """
    p_hat = np.asarray(p_hat, dtype=float)
    entropy_term = -np.log(p_hat**2 + (1.0 - p_hat) ** 2)
    if lam == 0.0:
        out = entropy_term
    else:
        kl = p_hat * np.log(p_hat / p) + (1.0 - p_hat) * np.log((1.0 - p_hat) / (1.0 - p))
        out = entropy_term - (lam / uq) * kl
    if out.ndim == 0:
        return float(out)
    return out


def calibrate_probability(
    p: float,
    uq: float,
    config: CalibrationConfig,
    trace: list | None = None,
) -> float:
    """Adjusted probability maximizing the calibration objective.

    Projected gradient ascent from p with backtracking halving; accepted
    iterates are strictly ascending in objective.  ``trace`` (a list, pure
    backend only) collects the objective sequence.  Non-convergence at the
    iteration cap returns the best iterate with a warning.
    """
    if uq <= 0:
        raise ParameterError(f"uncertainty score must be positive, got {uq}")
    lo, hi = config.domain
    if math.isinf(config.lambda_):
        # the anchor term dominates every move away from p: exact fixed point
        return min(max(p, lo), hi)
    # an anchor at exactly 0 or 1 makes the KL term blow up; clip it into
    # the open domain like every other probability
    p = min(max(p, lo), hi)
    if trace is not None:
        p_hat, _, converged = _accel.pure.calibrate_scalar(
            p, uq, config.lambda_, config.step_size, config.max_iters,
            config.stop_delta, lo, hi, trace=trace,
        )
    else:
        p_hat, _, converged = _accel.calibrate_scalar(
            p, uq, config.lambda_, config.step_size, config.max_iters,
            config.stop_delta, lo, hi,
        )
    if not converged:
        warnings.warn(
            f"calibration stopped at max_iters={config.max_iters} before reaching "
            f"stop_delta={config.stop_delta}; returning the best iterate",
            ConvergenceWarning,
            stacklevel=2,
        )
    return float(p_hat)


def calibrate_sequence_probabilities(
    bundle: QuestionBundle,
    uq_scores: Sequence[float],
    config: CalibrationConfig,
) -> list[float]:
    """Per-sequence calibration followed by renormalization across the bundle."""
    norm_probs = bundle.normalized_probabilities()
    if len(uq_scores) != len(norm_probs):
        raise ParameterError(
            f"uq_scores length {len(uq_scores)} does not match {len(norm_probs)} generations"
        )
    adjusted = [calibrate_probability(p, uq, config) for p, uq in zip(norm_probs, uq_scores)]
    total = sum(adjusted)
    return [value / total for value in adjusted]


def calibrate_bundle(
    bundle: QuestionBundle,
    clustering: SemanticClustering,
    uq_scores: Sequence[float],
    config: CalibrationConfig,
    base=10,
    adjusted_seq_probs: Sequence[float] | None = None,
) -> tuple[list[float], EntropyReport]:
    """Calibrated cluster probabilities plus the full entropy report.

    ``adjusted_seq_probs`` lets a caller that already ran the sequence-level
    calibration pass the result in instead of recomputing it.
    """
    from semuq.clustering import discrete_cluster_probabilities

    base_tag = normalize_base(base)
    if adjusted_seq_probs is None:
        adjusted_seq_probs = calibrate_sequence_probabilities(bundle, uq_scores, config)
    adjusted_seq_probs = list(adjusted_seq_probs)
    total = sum(adjusted_seq_probs)
    adjusted_cluster_probs = [
        sum(adjusted_seq_probs[i] for i in cluster.member_indices) / total
        for cluster in clustering.clusters
    ]
    original_cluster_probs = cluster_probabilities(clustering, bundle)
    report = EntropyReport(
        question_id=bundle.question_id,
        naive_entropy=naive_entropy(bundle.normalized_probabilities(), base=base_tag_to_base(base_tag)),
        shannon_semantic=shannon_semantic_entropy(original_cluster_probs, base=base_tag_to_base(base_tag)),
        discrete_semantic=shannon_semantic_entropy(
            discrete_cluster_probabilities(clustering), base=base_tag_to_base(base_tag)
        ),
        renyi_semantic=renyi_semantic_entropy(original_cluster_probs, base=base_tag_to_base(base_tag)),
        renyi_semantic_calibrated=renyi_semantic_entropy(
            adjusted_cluster_probs, base=base_tag_to_base(base_tag)
        ),
        log_base=base_tag,
        per_cluster_terms=squared_cluster_terms(adjusted_cluster_probs),
    )
    return adjusted_cluster_probs, report


def base_tag_to_base(tag: str):
    return 10 if tag == "10" else "e"
