"""End-to-end orchestration: cluster, embed, solve, perturb, score, calibrate.

Each question bundle gets its own kernel-mean-embedding wave function and
Hamiltonian; only the operator basis (a function of the spin count alone)
is cached across bundles.  Stage failures are wrapped with the stage name
and question id; a run over many bundles skips failing ones and reports
counts instead of dying.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import json
import logging
import math
import zlib
from typing import Any, Sequence

import numpy as np

from semuq.clustering import (
    EntailmentBackend,
    ExactMatchBackend,
    ExternalServiceBackend,
    SemanticClustering,
    assign_clusters,
    clustering_from_records,
)
from semuq.entropy import (
    CalibrationConfig,
    EntropyReport,
    calibrate_bundle,
    calibrate_sequence_probabilities,
    normalize_base,
)
from semuq.errors import (
    ParameterError,
    PipelineStageError,
    SemuqError,
    ValidationError,
)
from semuq.kme import dyadic_grid, empirical_kme, l2_normalize
from semuq.metrics import (
    EvaluationReport,
    WinRateMatrix,
    auroc,
    evaluate_method,
    win_rate_matrix,
)
from semuq.qtn import (
    assemble_hamiltonian,
    eigendecompose,
    first_order_corrections,
    null_space_weights,
    operator_basis,
    quantum_correlation_matrix,
    uncertainty_features,
    uq_score,
)
from semuq.records import ExperimentRun, QuestionBundle

logger = logging.getLogger("semuq")

PERTURBATION_KINDS = ("parallel", "uniform", "seeded-random")
BACKEND_KINDS = ("exact-match", "external", "recorded")

# canonical method key -> EntropyReport field
METHOD_FIELDS = {
    "naive_entropy": "naive_entropy",
    "shannon_semantic": "shannon_semantic",
    "discrete_semantic": "discrete_semantic",
    "renyi_semantic": "renyi_semantic",
    "renyi_semantic_calibrated": "renyi_semantic_calibrated",
}

METHOD_ALIASES = {
    "NE": "naive_entropy",
    "SE_S": "shannon_semantic",
    "DSE_S": "discrete_semantic",
    "SE_R": "renyi_semantic",
    "SE_R+": "renyi_semantic_calibrated",
    "SE_R⁺": "renyi_semantic_calibrated",
}

DEFAULT_METHODS = tuple(METHOD_FIELDS)


def canonical_method(name: str) -> str:
    if name in METHOD_FIELDS:
        return name
    if name in METHOD_ALIASES:
        return METHOD_ALIASES[name]
    valid = sorted(METHOD_FIELDS) + sorted(METHOD_ALIASES)
    raise ParameterError(f"unknown method {name!r}; valid names: {', '.join(valid)}")


@dataclasses.dataclass
class RunConfig:
    """Flat run configuration; field names double as config-file keys."""

    spins: int = 8
    sigma: float = 0.05
    epsilon: float = 0.01
    m_adj: int = 8
    lambda_: float = 1.0
    log_base: str = "10"
    backend: str = "recorded"
    endpoint: str | None = None
    seed: int = 0
    perturbation: str = "parallel"
    locality: int = 1
    eps_floor: float = 1e-9
    tau: float = 1e-8
    null_tol: float = 1e-8
    weighted_kme: bool = True
    max_attempts: int = 3
    max_workers: int = 1

    def __post_init__(self):
        if not isinstance(self.spins, int) or self.spins < 2:
            raise ParameterError(f"spins must be an integer >= 2, got {self.spins!r}")
        for name in ("sigma", "epsilon", "eps_floor", "tau", "null_tol"):
            value = getattr(self, name)
            if not (value > 0) or math.isnan(value):
                raise ParameterError(f"{name} must be positive, got {value!r}")
        if math.isnan(self.lambda_) or self.lambda_ < 0:
            raise ParameterError(f"lambda must be >= 0, got {self.lambda_!r}")
        if not isinstance(self.m_adj, int) or self.m_adj < 1:
            raise ParameterError(f"m_adj must be an integer >= 1, got {self.m_adj!r}")
        if self.m_adj > 2**self.spins:
            raise ParameterError(
                f"m_adj = {self.m_adj} exceeds the {2**self.spins} available modes"
            )
        self.log_base = normalize_base(self.log_base)
        if self.backend not in BACKEND_KINDS:
            raise ParameterError(
                f"backend must be one of {BACKEND_KINDS}, got {self.backend!r}"
            )
        if self.backend == "external" and not self.endpoint:
            raise ParameterError("external backend requires an endpoint")
        if self.perturbation not in PERTURBATION_KINDS:
            raise ParameterError(
                f"perturbation must be one of {PERTURBATION_KINDS}, got {self.perturbation!r}"
            )
        if not isinstance(self.locality, int) or not (1 <= self.locality <= self.spins - 1):
            raise ParameterError(
                f"locality must be an integer in [1, {self.spins - 1}], got {self.locality!r}"
            )
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ParameterError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not isinstance(self.max_attempts, int) or self.max_attempts < 1:
            raise ParameterError(f"max_attempts must be >= 1, got {self.max_attempts!r}")
        if not isinstance(self.max_workers, int) or self.max_workers < 1:
            raise ParameterError(f"max_workers must be >= 1, got {self.max_workers!r}")

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["lambda"] = out.pop("lambda_")
        return out

    @classmethod
    def from_mapping(cls, mapping: dict[str, Any]) -> "RunConfig":
        """Build from string-valued config pairs; unknown keys are rejected."""
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs: dict[str, Any] = {}
        for raw_key, raw_value in mapping.items():
            key = raw_key.strip().replace("-", "_")
            if key == "lambda":
                key = "lambda_"
            if key not in fields:
                raise ParameterError(f"unknown config key {raw_key!r}")
            kwargs[key] = _parse_config_value(key, raw_value)
        return cls(**kwargs)


def _parse_config_value(key: str, value: Any):
    if not isinstance(value, str):
        return value
    text = value.strip()
    if key in ("spins", "m_adj", "seed", "locality", "max_attempts", "max_workers"):
        try:
            return int(text)
        except ValueError:
            raise ParameterError(f"config key {key!r} needs an integer, got {text!r}") from None
    if key in ("sigma", "epsilon", "lambda_", "eps_floor", "tau", "null_tol"):
        try:
            return float(text)
        except ValueError:
            raise ParameterError(f"config key {key!r} needs a number, got {text!r}") from None
    if key == "weighted_kme":
        lowered = text.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ParameterError(f"config key {key!r} needs a boolean, got {text!r}")
    if key == "endpoint" and text == "":
        return None
    return text


def make_backend(config: RunConfig) -> EntailmentBackend | None:
    """None means cluster labels are read from the records themselves."""
    if config.backend == "recorded":
        return None
    if config.backend == "exact-match":
        return ExactMatchBackend()
    return ExternalServiceBackend(config.endpoint, max_attempts=config.max_attempts)


def bundle_rng(config: RunConfig, question_id: str) -> np.random.Generator:
    """Independent stream per question, reproducible for a fixed seed."""
    return np.random.default_rng(
        [config.seed, zlib.crc32(question_id.encode("utf-8"))]
    )


def perturbation_direction(
    config: RunConfig, weights: np.ndarray, question_id: str
) -> np.ndarray:
    """Weight-space displacement of magnitude epsilon."""
    if config.perturbation == "parallel":
        direction = weights / np.linalg.norm(weights)
    elif config.perturbation == "uniform":
        direction = np.full(weights.shape, 1.0 / math.sqrt(weights.size))
    else:
        draw = bundle_rng(config, question_id).standard_normal(weights.size)
        norm = np.linalg.norm(draw)
        if norm == 0.0:
            draw = np.ones(weights.size)
            norm = math.sqrt(weights.size)
        direction = draw / norm
    return config.epsilon * direction


@dataclasses.dataclass
class PreparedBundle:
    """Everything score_bundle and a sweep need past the Hamiltonian stage."""

    bundle: QuestionBundle
    clustering: SemanticClustering
    uq_scores: list[float]
    null_residual: float
    null_approximate: bool
    kme_overlap: float
    kme_mode_index: int
    dropped_terms: int
    zero_modes: tuple[int, ...]


@dataclasses.dataclass
class BundleScorecard:
    question_id: str
    n_clusters: int
    cluster_sizes: list[int]
    uq_scores: list[float]
    report: EntropyReport
    null_residual: float
    null_approximate: bool
    kme_overlap: float
    kme_mode_index: int
    dropped_terms: int
    selected_index: int
    adjusted_seq_probs: list[float]
    adjusted_cluster_probs: list[float]
    zero_modes: tuple[int, ...] = ()

    def to_json_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["report"] = self.report.to_json_dict()
        out["zero_modes"] = list(self.zero_modes)
        return out

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "BundleScorecard":
        payload = dict(data)
        payload["report"] = EntropyReport.from_json_dict(data["report"])
        payload["cluster_sizes"] = list(data["cluster_sizes"])
        payload["uq_scores"] = list(data["uq_scores"])
        payload["adjusted_seq_probs"] = list(data["adjusted_seq_probs"])
        payload["adjusted_cluster_probs"] = list(data["adjusted_cluster_probs"])
        payload["zero_modes"] = tuple(data.get("zero_modes", ()))
        return cls(**{k: payload[k] for k in [f.name for f in dataclasses.fields(cls)]})


def _stage(stage: str, question_id: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SemuqError as err:
        if isinstance(err, PipelineStageError):
            raise
        raise PipelineStageError(stage, question_id, err) from err


def prepare_bundle(
    bundle: QuestionBundle,
    config: RunConfig,
    backend: EntailmentBackend | None = None,
) -> PreparedBundle:
    """Run clustering and the full uncertainty stack for one question."""
    qid = bundle.question_id
    _stage("validate", qid, bundle.validate)
    _stage("normalize", qid, bundle.normalize)
    if backend is None and config.backend != "recorded":
        backend = make_backend(config)
    if backend is None:
        clustering = _stage("cluster", qid, clustering_from_records, bundle)
    else:
        clustering = _stage("cluster", qid, assign_clusters, bundle, backend)

    norm_probs = bundle.normalized_probabilities()
    grid = dyadic_grid(config.spins)
    wf = _stage(
        "embed", qid, empirical_kme, norm_probs, grid, config.sigma,
        weighted=config.weighted_kme,
    )
    wf = _stage("embed", qid, l2_normalize, wf)

    basis = operator_basis(config.spins, config.locality)
    qcm = _stage("correlate", qid, quantum_correlation_matrix, basis, wf.values)
    null = _stage("solve-null", qid, null_space_weights, qcm, config.null_tol)
    hamiltonian = _stage("assemble", qid, assemble_hamiltonian, basis, null.weights)
    spectrum = _stage("diagonalize", qid, eigendecompose, hamiltonian, wf.values)

    delta_w = perturbation_direction(config, null.weights, qid)
    corrections = _stage(
        "perturb", qid, first_order_corrections, spectrum, basis, delta_w, config.tau
    )
    features = _stage(
        "featurize", qid, uncertainty_features, spectrum, corrections.modes,
        config.sigma, grid, config.eps_floor, delta_w,
    )
    scores = [
        _stage("uq-score", qid, uq_score, features, spectrum, x, config.m_adj, config.eps_floor)
        for x in norm_probs
    ]
    return PreparedBundle(
        bundle=bundle,
        clustering=clustering,
        uq_scores=scores,
        null_residual=null.residual,
        null_approximate=null.approximate,
        kme_overlap=spectrum.kme_overlap,
        kme_mode_index=spectrum.kme_mode_index,
        dropped_terms=corrections.dropped_terms,
        zero_modes=features.zero_modes,
    )


def score_prepared(prepared: PreparedBundle, config: RunConfig) -> BundleScorecard:
    """Calibration and entropy reporting on top of a prepared bundle."""
    qid = prepared.bundle.question_id
    calibration = CalibrationConfig(lambda_=config.lambda_)
    adjusted = _stage(
        "calibrate", qid, calibrate_sequence_probabilities,
        prepared.bundle, prepared.uq_scores, calibration,
    )
    selected = max(range(len(adjusted)), key=lambda i: (adjusted[i], -i))
    cluster_probs, report = _stage(
        "entropies", qid, calibrate_bundle,
        prepared.bundle, prepared.clustering, prepared.uq_scores, calibration,
        base=10 if config.log_base == "10" else "e",
        adjusted_seq_probs=adjusted,
    )
    return BundleScorecard(
        question_id=qid,
        n_clusters=prepared.clustering.n_clusters,
        cluster_sizes=prepared.clustering.sizes(),
        uq_scores=list(prepared.uq_scores),
        report=report,
        null_residual=prepared.null_residual,
        null_approximate=prepared.null_approximate,
        kme_overlap=prepared.kme_overlap,
        kme_mode_index=prepared.kme_mode_index,
        dropped_terms=prepared.dropped_terms,
        selected_index=selected,
        adjusted_seq_probs=list(adjusted),
        adjusted_cluster_probs=list(cluster_probs),
        zero_modes=prepared.zero_modes,
    )


def score_bundle(
    bundle: QuestionBundle,
    config: RunConfig,
    backend: EntailmentBackend | None = None,
) -> BundleScorecard:
    """Full per-question scoring: clustering through calibrated entropies."""
    return score_prepared(prepare_bundle(bundle, config, backend), config)


def save_scorecards(cards: Sequence[BundleScorecard], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for card in cards:
            fh.write(json.dumps(card.to_json_dict(), sort_keys=True) + "\n")


def load_scorecards(path) -> list[BundleScorecard]:
    cards = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                cards.append(BundleScorecard.from_json_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as err:
                raise ValidationError(f"{path}:{lineno}: bad scorecard record: {err}") from err
    return cards


@dataclasses.dataclass
class ExperimentOutcome:
    run: ExperimentRun
    scorecards: list[BundleScorecard]
    reports: list[EvaluationReport]
    win_rates: WinRateMatrix | None
    n_skipped_unlabeled: int
    n_failed: int
    failures: dict[str, str]


def _score_many(
    bundles: Sequence[QuestionBundle], config: RunConfig
) -> tuple[list[BundleScorecard], dict[str, str]]:
    """Score bundles in input order; failures are collected, not raised."""

    def one(bundle: QuestionBundle):
        try:
            return score_bundle(bundle, config)
        except SemuqError as err:
            return err

    if config.max_workers > 1:
        with concurrent.futures.ThreadPoolExecutor(config.max_workers) as pool:
            results = list(pool.map(one, bundles))
    else:
        results = [one(b) for b in bundles]

    cards: list[BundleScorecard] = []
    failures: dict[str, str] = {}
    for bundle, result in zip(bundles, results):
        if isinstance(result, BundleScorecard):
            cards.append(result)
        else:
            failures[bundle.question_id] = str(result)
            logger.warning("skipping %s: %s", bundle.question_id, result)
    return cards, failures


def run_experiment(
    bundles: Sequence[QuestionBundle],
    config: RunConfig,
    methods: Sequence[str] = DEFAULT_METHODS,
) -> ExperimentOutcome:
    """Score labeled bundles under each entropy method and evaluate them.

    Bundles sharing a metadata "scenario" value form one win-rate scenario;
    unlabeled bundles are counted and skipped, as are bundles whose scenario
    cannot support AUROC (single-class labels).
    """
    method_keys = [canonical_method(m) for m in methods]
    if len(set(method_keys)) != len(method_keys):
        raise ParameterError(f"duplicate methods after normalization: {method_keys}")
    if not method_keys:
        raise ParameterError("need at least one method")

    labeled = [b for b in bundles if b.fully_labeled()]
    n_skipped = len(bundles) - len(labeled)
    cards, failures = _score_many(labeled, config)
    if not cards:
        raise ValidationError("no bundle survived scoring; nothing to evaluate")

    by_id = {b.question_id: b for b in labeled}
    labels = [
        _bundle_label(by_id[card.question_id], card.selected_index) for card in cards
    ]
    method_scores: dict[str, dict[str, float]] = {}
    reports: list[EvaluationReport] = []
    for key in method_keys:
        scores = [getattr(card.report, METHOD_FIELDS[key]) for card in cards]
        method_scores[key] = {
            card.question_id: score for card, score in zip(cards, scores)
        }
        reports.append(
            evaluate_method(key, scores, labels, n_skipped_unlabeled=n_skipped)
        )

    win_rates = scenario_win_rates(cards, by_id, labels, method_keys)

    run = ExperimentRun(
        bundles=[by_id[card.question_id] for card in cards],
        method_scores=method_scores,
        config={
            **config.to_dict(),
            "methods": method_keys,
            "n_skipped_unlabeled": n_skipped,
            "n_failed": len(failures),
        },
    )
    run.validate()
    return ExperimentOutcome(
        run=run,
        scorecards=cards,
        reports=reports,
        win_rates=win_rates,
        n_skipped_unlabeled=n_skipped,
        n_failed=len(failures),
        failures=failures,
    )


def _bundle_label(bundle: QuestionBundle, selected_index: int) -> bool:
    label = bundle.generations[selected_index].is_correct
    return bool(label)


def scenario_win_rates(
    cards: Sequence[BundleScorecard],
    by_id: dict[str, QuestionBundle],
    labels: Sequence[bool],
    method_keys: Sequence[str],
) -> WinRateMatrix | None:
    """Win rates from per-scenario AUROCs; None if no scenario supports one."""
    groups: dict[str, list[int]] = {}
    for idx, card in enumerate(cards):
        scenario = str(by_id[card.question_id].metadata.get("scenario", "default"))
        groups.setdefault(scenario, []).append(idx)
    per_scenario: dict[str, dict[str, float]] = {}
    for scenario, indices in groups.items():
        scenario_labels = [labels[i] for i in indices]
        if len(set(scenario_labels)) < 2:
            logger.warning(
                "scenario %r has single-class labels; excluded from win rates", scenario
            )
            continue
        per_scenario[scenario] = {
            key: auroc(
                [getattr(cards[i].report, METHOD_FIELDS[key]) for i in indices],
                scenario_labels,
            )
            for key in method_keys
        }
    if not per_scenario:
        return None
    return win_rate_matrix(per_scenario)
