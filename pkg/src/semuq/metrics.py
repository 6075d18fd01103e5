"""Detection-quality metrics for uncertainty scores against correctness labels.

AUROC through the rank statistic (exactly equivalent to counting concordant
pairs), rejection-accuracy curves over a retained-fraction grid, their
trapezoidal area, pairwise win-rate matrices across scenarios, calibration
weight sweeps, and binned signed normalized entropy drift.

Convention throughout: the inputs are uncertainty scores, so confidence is
their negation; lower entropy means higher confidence.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from typing import Any, Mapping, Sequence

import numpy as np

from semuq.clustering import SemanticClustering, cluster_probabilities
from semuq.entropy import (
    CalibrationConfig,
    calibrate_bundle,
    calibrate_sequence_probabilities,
    renyi_semantic_entropy,
)
from semuq.errors import ParameterError, UndefinedMetricError, ValidationError
from semuq.records import QuestionBundle

# retained fractions 1.00 down to 0.80, strictly decreasing
DEFAULT_RAC_FRACTIONS: tuple[float, ...] = tuple(
    round(1.0 - 0.01 * k, 2) for k in range(21)
)

# float guard: 0.83 * 100 overshoots 83 by one ulp, ceil must not round it to 84
RAC_COUNT_GUARD = 1e-9

DRIFT_EPS_FLOOR = 1e-9


def _checked_labels(uncertainty_scores: Sequence[float], is_correct: Sequence[bool]):
    scores = np.asarray(list(uncertainty_scores), dtype=float)
    if scores.size == 0:
        raise ValidationError("uncertainty scores must be nonempty")
    if len(is_correct) != scores.size:
        raise ValidationError(
            f"{scores.size} scores but {len(is_correct)} labels"
        )
    if np.any(~np.isfinite(scores)):
        raise ValidationError("uncertainty scores must be finite")
    for value in is_correct:
        if not isinstance(value, (bool, np.bool_)):
            raise ValidationError(f"labels must be booleans, got {value!r}")
    labels = np.asarray([bool(v) for v in is_correct], dtype=bool)
    return scores, labels


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank range."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=float)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        # ranks i+1 .. j+1 averaged
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auroc(uncertainty_scores: Sequence[float], is_correct: Sequence[bool]) -> float:
    """Probability that a random correct item is more confident than a random
    incorrect one, ties counted half.

    Computed from midranks of the negated scores; agrees with brute-force
    pair counting exactly, not merely to rounding.
    """
    scores, labels = _checked_labels(uncertainty_scores, is_correct)
    n_pos = int(labels.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            f"auroc needs both label classes; got {n_pos} correct and {n_neg} incorrect"
        )
    confidence = -scores
    ranks = _midranks(confidence)
    pos_rank_sum = float(ranks[labels].sum())
    return (pos_rank_sum - 0.5 * n_pos * (n_pos + 1)) / (n_pos * n_neg)


def rejection_accuracy_curve(
    uncertainty_scores: Sequence[float],
    is_correct: Sequence[bool],
    fractions: Sequence[float] | None = None,
) -> list[tuple[float, float]]:
    """Mean accuracy of the retained lowest-uncertainty items per fraction.

    For fraction f the ceil(f*n) most confident items are kept, ties broken
    by input order.  A fraction that retains nothing is skipped with a
    warning rather than reported.
    """
    scores, labels = _checked_labels(uncertainty_scores, is_correct)
    if fractions is None:
        fractions = DEFAULT_RAC_FRACTIONS
    fractions = [float(f) for f in fractions]
    for f in fractions:
        if not (0.0 < f <= 1.0) or math.isnan(f):
            raise ParameterError(f"retained fractions must lie in (0, 1], got {f}")
    n = scores.size
    order = np.argsort(scores, kind="stable")
    correct_prefix = np.cumsum(labels[order].astype(float))
    curve: list[tuple[float, float]] = []
    for f in fractions:
        k = math.ceil(f * n - RAC_COUNT_GUARD)
        if k <= 0:
            warnings.warn(f"fraction {f} retains no items out of {n}; point skipped")
            continue
        curve.append((f, float(correct_prefix[k - 1]) / k))
    return curve


def aurac(rac: Sequence[tuple[float, float]]) -> float:
    """Trapezoidal mean of accuracy over the curve's retained-fraction range."""
    if len(rac) == 0:
        raise ValidationError("rejection-accuracy curve must be nonempty")
    points = sorted((float(f), float(a)) for f, a in rac)
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    span = xs[-1] - xs[0]
    if span == 0.0:
        return sum(ys) / len(ys)
    area = 0.0
    for i in range(len(xs) - 1):
        area += 0.5 * (ys[i] + ys[i + 1]) * (xs[i + 1] - xs[i])
    return area / span


@dataclasses.dataclass
class EvaluationReport:
    method_name: str
    auroc: float
    rac: list[tuple[float, float]]
    aurac: float
    n_questions: int
    n_skipped_unlabeled: int

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "method_name": self.method_name,
            "auroc": self.auroc,
            "rac": [[f, a] for f, a in self.rac],
            "aurac": self.aurac,
            "n_questions": self.n_questions,
            "n_skipped_unlabeled": self.n_skipped_unlabeled,
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "EvaluationReport":
        return cls(
            method_name=data["method_name"],
            auroc=data["auroc"],
            rac=[(float(f), float(a)) for f, a in data["rac"]],
            aurac=data["aurac"],
            n_questions=data["n_questions"],
            n_skipped_unlabeled=data["n_skipped_unlabeled"],
        )


def evaluate_method(
    method_name: str,
    uncertainty_scores: Sequence[float],
    is_correct: Sequence[bool],
    fractions: Sequence[float] | None = None,
    n_skipped_unlabeled: int = 0,
) -> EvaluationReport:
    curve = rejection_accuracy_curve(uncertainty_scores, is_correct, fractions)
    return EvaluationReport(
        method_name=method_name,
        auroc=auroc(uncertainty_scores, is_correct),
        rac=curve,
        aurac=aurac(curve),
        n_questions=len(uncertainty_scores),
        n_skipped_unlabeled=n_skipped_unlabeled,
    )


@dataclasses.dataclass
class WinRateMatrix:
    """rates[i][j]: fraction of scenarios where method i beats method j.

    Ties contribute 0.5 to both directions, so rates[i][j] + rates[j][i] = 1
    off the diagonal; the diagonal is reported as 0.5.
    """

    methods: list[str]
    rates: list[list[float]]
    n_scenarios: int

    def to_json_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "WinRateMatrix":
        return cls(
            methods=list(data["methods"]),
            rates=[list(row) for row in data["rates"]],
            n_scenarios=data["n_scenarios"],
        )


def win_rate_matrix(
    per_scenario_metric: Mapping[str, Mapping[str, float]],
) -> WinRateMatrix:
    """Pairwise comparison of methods across scenarios on a higher-is-better metric."""
    if not per_scenario_metric:
        raise ValidationError("need at least one scenario")
    scenarios = list(per_scenario_metric)
    methods = list(per_scenario_metric[scenarios[0]])
    if not methods:
        raise ValidationError(f"scenario {scenarios[0]!r} reports no methods")
    for scenario in scenarios:
        for method in methods:
            if method not in per_scenario_metric[scenario]:
                raise ValidationError(
                    f"scenario {scenario!r} is missing method {method!r}"
                )
    n = len(scenarios)
    rates = [[0.5] * len(methods) for _ in methods]
    for i, mi in enumerate(methods):
        for j, mj in enumerate(methods):
            if i == j:
                continue
            score = 0.0
            for scenario in scenarios:
                vi = per_scenario_metric[scenario][mi]
                vj = per_scenario_metric[scenario][mj]
                if vi > vj:
                    score += 1.0
                elif vi == vj:
                    score += 0.5
            rates[i][j] = score / n
    return WinRateMatrix(methods=methods, rates=rates, n_scenarios=n)


@dataclasses.dataclass
class LambdaSweepResult:
    curve: list[tuple[float, float]]  # (lambda, auroc) in input grid order
    best_lambda: float
    best_auroc: float
    baseline_auroc: float  # uncalibrated quadratic semantic entropy

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "curve": [[lam, value] for lam, value in self.curve],
            "best_lambda": self.best_lambda,
            "best_auroc": self.best_auroc,
            "baseline_auroc": self.baseline_auroc,
        }


def _selected_label(bundle: QuestionBundle, seq_probs: Sequence[float]) -> bool:
    """Correctness of the highest-probability generation, first index on ties."""
    best = max(range(len(seq_probs)), key=lambda i: (seq_probs[i], -i))
    label = bundle.generations[best].is_correct
    if label is None:
        raise ValidationError(
            f"bundle {bundle.question_id!r} has no correctness label at index {best}"
        )
    return bool(label)


def sweep_lambda(
    bundles: Sequence[QuestionBundle],
    clusterings: Sequence[SemanticClustering],
    uq_scores: Sequence[Sequence[float]],
    lambdas: Sequence[float],
    base=10,
) -> LambdaSweepResult:
    """AUROC of the calibrated quadratic entropy per calibration weight.

    The baseline is the uncalibrated quadratic entropy with selection by
    normalized probability; each sweep point recalibrates every bundle and
    takes both its score and its selected-answer label from the adjusted
    probabilities.
    """
    if not (len(bundles) == len(clusterings) == len(uq_scores)):
        raise ValidationError(
            f"got {len(bundles)} bundles, {len(clusterings)} clusterings, "
            f"{len(uq_scores)} uq score lists"
        )
    lambdas = [float(lam) for lam in lambdas]
    if not lambdas:
        raise ValidationError("lambda grid must be nonempty")
    for lam in lambdas:
        if math.isnan(lam) or lam < 0:
            raise ParameterError(f"calibration weights must be >= 0, got {lam}")
    keep = [i for i, b in enumerate(bundles) if b.fully_labeled()]
    if not keep:
        raise ValidationError("sweep needs at least one fully labeled bundle")

    baseline_scores: list[float] = []
    baseline_labels: list[bool] = []
    for i in keep:
        norm = bundles[i].normalized_probabilities()
        probs = cluster_probabilities(clusterings[i], bundles[i])
        baseline_scores.append(renyi_semantic_entropy(probs, base=base))
        baseline_labels.append(_selected_label(bundles[i], norm))
    baseline_auroc = auroc(baseline_scores, baseline_labels)

    curve: list[tuple[float, float]] = []
    for lam in lambdas:
        config = CalibrationConfig(lambda_=lam)
        scores: list[float] = []
        labels: list[bool] = []
        for i in keep:
            adjusted = calibrate_sequence_probabilities(bundles[i], uq_scores[i], config)
            _, report = calibrate_bundle(
                bundles[i],
                clusterings[i],
                uq_scores[i],
                config,
                base=base,
                adjusted_seq_probs=adjusted,
            )
            scores.append(report.renyi_semantic_calibrated)
            labels.append(_selected_label(bundles[i], adjusted))
        curve.append((lam, auroc(scores, labels)))

    best_index = max(range(len(curve)), key=lambda k: (curve[k][1], -k))
    return LambdaSweepResult(
        curve=curve,
        best_lambda=curve[best_index][0],
        best_auroc=curve[best_index][1],
        baseline_auroc=baseline_auroc,
    )


@dataclasses.dataclass
class EntropyDriftBin:
    lower: float
    upper: float
    count: int
    mean: float  # nan when the bin is empty
    standard_error: float  # population stddev / sqrt(count); nan when empty


def signed_normalized_entropy_difference(
    old_entropy: Sequence[float],
    new_entropy: Sequence[float],
    bin_edges: Sequence[float],
    eps_floor: float = DRIFT_EPS_FLOOR,
) -> list[EntropyDriftBin]:
    """Per-bin moments of (new - old) / max(old, eps_floor), binned by old value.

    Bins are left-closed; a value equal to the last edge lands in the last
    bin.  Items with zero old entropy divide by the floor and sort into the
    first bin.
    """
    old = np.asarray(list(old_entropy), dtype=float)
    new = np.asarray(list(new_entropy), dtype=float)
    if old.size != new.size:
        raise ValidationError(f"{old.size} old values but {new.size} new values")
    if old.size == 0:
        raise ValidationError("entropy lists must be nonempty")
    edges = np.asarray(list(bin_edges), dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValidationError("bin edges must be ascending with at least two entries")
    if np.any(old < edges[0]) or np.any(old > edges[-1]):
        raise ValidationError(
            f"old entropies must lie within [{edges[0]}, {edges[-1]}]"
        )
    nd = (new - old) / np.maximum(old, eps_floor)
    indices = np.searchsorted(edges, old, side="right") - 1
    indices = np.clip(indices, 0, edges.size - 2)
    bins: list[EntropyDriftBin] = []
    for b in range(edges.size - 1):
        values = nd[indices == b]
        if values.size == 0:
            bins.append(
                EntropyDriftBin(float(edges[b]), float(edges[b + 1]), 0, math.nan, math.nan)
            )
            continue
        mean = float(values.mean())
        se = float(values.std(ddof=0) / math.sqrt(values.size))
        bins.append(
            EntropyDriftBin(float(edges[b]), float(edges[b + 1]), int(values.size), mean, se)
        )
    return bins


def rac_curve_csv(curve: Sequence[tuple[float, float]]) -> str:
    lines = ["retained_fraction,accuracy"]
    lines += [f"{f!r},{a!r}" for f, a in curve]
    return "\n".join(lines) + "\n"


def lambda_curve_csv(result: LambdaSweepResult) -> str:
    lines = ["lambda,auroc"]
    lines += [f"{lam!r},{value!r}" for lam, value in result.curve]
    return "\n".join(lines) + "\n"
