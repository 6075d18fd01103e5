"""semuq: confabulation-risk scoring for sampled LLM answers.

Generations are clustered by semantic equivalence, their probabilities are
embedded as a wave function on a dyadic grid, a local Hamiltonian whose
ground structure matches the embedding supplies perturbation-based
uncertainty scores, and those scores calibrate cluster probabilities before
entropy-based risk measures and AUROC-style evaluation.
"""

from semuq._accel import BACKEND as accel_backend
from semuq.clustering import (
    DEFAULT_ENTAILMENT_TEMPLATE,
    Cluster,
    EntailmentBackend,
    ExactMatchBackend,
    ExternalServiceBackend,
    PrecomputedMatrixBackend,
    SemanticClustering,
    assign_clusters,
    bidirectional_entails,
    cluster_probabilities,
    clustering_from_records,
    discrete_cluster_probabilities,
)
from semuq.entropy import (
    CalibrationConfig,
    EntropyReport,
    calibrate_bundle,
    calibrate_probability,
    calibrate_sequence_probabilities,
    calibration_objective,
    naive_entropy,
    renyi_semantic_entropy,
    shannon_semantic_entropy,
)
from semuq.errors import (
    ConvergenceWarning,
    DegeneracyError,
    DegenerateInputError,
    NumericalError,
    ParameterError,
    PipelineStageError,
    ProtocolError,
    SemuqError,
    TransportError,
    UndefinedMetricError,
    ValidationError,
)
from semuq.kme import (
    AmplitudeGrid,
    WaveFunction,
    dyadic_grid,
    empirical_kme,
    gaussian_kernel,
    l2_normalize,
)
from semuq.metrics import (
    EvaluationReport,
    LambdaSweepResult,
    WinRateMatrix,
    aurac,
    auroc,
    evaluate_method,
    rejection_accuracy_curve,
    signed_normalized_entropy_difference,
    sweep_lambda,
    win_rate_matrix,
)
from semuq.pipeline import (
    BundleScorecard,
    ExperimentOutcome,
    RunConfig,
    prepare_bundle,
    run_experiment,
    score_bundle,
)
from semuq.qtn import (
    OperatorBasis,
    QcmMatrix,
    Spectrum,
    build_operator_basis,
    eigendecompose,
    first_order_corrections,
    null_space_weights,
    nullspace_perturbation_bound_check,
    quantum_correlation_matrix,
    uncertainty_features,
    uq_score,
)
from semuq.records import (
    ExperimentRun,
    GenerationRecord,
    QuestionBundle,
    load_bundles,
    normalize_sequence_probabilities,
    save_bundles,
    sequence_log_probability,
)

__version__ = "0.1.0"

__all__ = [
    "accel_backend",
    "DEFAULT_ENTAILMENT_TEMPLATE",
    "Cluster",
    "EntailmentBackend",
    "ExactMatchBackend",
    "ExternalServiceBackend",
    "PrecomputedMatrixBackend",
    "SemanticClustering",
    "assign_clusters",
    "bidirectional_entails",
    "cluster_probabilities",
    "clustering_from_records",
    "discrete_cluster_probabilities",
    "CalibrationConfig",
    "EntropyReport",
    "calibrate_bundle",
    "calibrate_probability",
    "calibrate_sequence_probabilities",
    "calibration_objective",
    "naive_entropy",
    "renyi_semantic_entropy",
    "shannon_semantic_entropy",
    "ConvergenceWarning",
    "DegeneracyError",
    "DegenerateInputError",
    "NumericalError",
    "ParameterError",
    "PipelineStageError",
    "ProtocolError",
    "SemuqError",
    "TransportError",
    "UndefinedMetricError",
    "ValidationError",
    "AmplitudeGrid",
    "WaveFunction",
    "dyadic_grid",
    "empirical_kme",
    "gaussian_kernel",
    "l2_normalize",
    "EvaluationReport",
    "LambdaSweepResult",
    "WinRateMatrix",
    "aurac",
    "auroc",
    "evaluate_method",
    "rejection_accuracy_curve",
    "signed_normalized_entropy_difference",
    "sweep_lambda",
    "win_rate_matrix",
    "BundleScorecard",
    "ExperimentOutcome",
    "RunConfig",
    "prepare_bundle",
    "run_experiment",
    "score_bundle",
    "OperatorBasis",
    "QcmMatrix",
    "Spectrum",
    "build_operator_basis",
    "eigendecompose",
    "first_order_corrections",
    "null_space_weights",
    "nullspace_perturbation_bound_check",
    "quantum_correlation_matrix",
    "uncertainty_features",
    "uq_score",
    "ExperimentRun",
    "GenerationRecord",
    "QuestionBundle",
    "load_bundles",
    "normalize_sequence_probabilities",
    "save_bundles",
    "sequence_log_probability",
    "__version__",
]
