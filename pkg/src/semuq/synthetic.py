"""Synthetic labeled corpora for benchmarks and end-to-end validation.

Bundles carry recorded cluster assignments (no entailment backend needed)
and raw probabilities drawn from a Dirichlet, so cluster structure and
probability concentration vary question to question.  Labels are planted
by running the scoring pipeline itself at a chosen calibration weight and
marking the low-entropy half of the corpus correct, with a seeded fraction
of flips: corpora where the calibrated entropy genuinely carries signal,
plus label noise so nothing is perfectly separable.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from semuq.errors import ParameterError
from semuq.pipeline import PreparedBundle, RunConfig, prepare_bundle
from semuq.records import GenerationRecord, QuestionBundle


def random_bundle(
    rng: np.random.Generator,
    question_id: str,
    n_generations: int = 8,
    max_clusters: int = 4,
    concentration: float = 0.7,
) -> QuestionBundle:
    """One unlabeled bundle with random partition and Dirichlet raw masses.

    Low concentration produces spiky probability vectors (confident
    bundles), high concentration produces flat ones.
    """
    if n_generations < 1:
        raise ParameterError(f"need at least one generation, got {n_generations}")
    n_clusters = int(rng.integers(1, min(max_clusters, n_generations) + 1))
    # every cluster occupied, remainder assigned at random
    assignment = list(range(n_clusters))
    assignment += [int(rng.integers(0, n_clusters)) for _ in range(n_generations - n_clusters)]
    rng.shuffle(assignment)
    raw = rng.dirichlet(np.full(n_generations, concentration)) + 1e-6
    scale = float(rng.uniform(0.5, 4.0))
    generations = [
        GenerationRecord(
            text=f"{question_id} candidate answer {assignment[i]} (sample {i})",
            raw_seq_prob=float(raw[i] * scale),
            cluster_id=assignment[i],
        )
        for i in range(n_generations)
    ]
    return QuestionBundle(
        question_id=question_id,
        prompt=f"synthetic question {question_id}",
        generations=generations,
        metadata={},
    )


def random_corpus(
    n_questions: int,
    n_generations: int = 8,
    seed: int = 7,
    max_clusters: int = 4,
    n_scenarios: int = 1,
) -> list[QuestionBundle]:
    """Unlabeled bundles q000, q001, ... with scenarios assigned round-robin."""
    rng = np.random.default_rng(seed)
    bundles = []
    for k in range(n_questions):
        concentration = float(rng.uniform(0.3, 2.5))
        bundle = random_bundle(
            rng, f"q{k:03d}", n_generations, max_clusters, concentration
        )
        if n_scenarios > 1:
            bundle.metadata["scenario"] = f"s{k % n_scenarios}"
        bundles.append(bundle)
    return bundles


@dataclasses.dataclass
class PlantedCorpus:
    bundles: list[QuestionBundle]
    prepared: list[PreparedBundle]
    planted_scores: list[float]  # calibrated quadratic entropy at lambda_star
    n_flipped: int


def plant_labels(
    bundles: list[QuestionBundle],
    config: RunConfig,
    lambda_star: float = 1.0,
    flip_fraction: float = 0.1,
    seed: int = 11,
) -> PlantedCorpus:
    """Label each bundle by its own calibrated entropy at ``lambda_star``.

    Bundles scoring below the corpus median are marked correct, then a
    seeded fraction of bundles gets its label flipped.  All generations in
    a bundle share the label, so selection order cannot change a bundle's
    correctness downstream.
    """
    from semuq.entropy import CalibrationConfig, calibrate_bundle

    prepared = [prepare_bundle(b, config) for b in bundles]
    calibration = CalibrationConfig(lambda_=lambda_star)
    scores = []
    for prep in prepared:
        _, report = calibrate_bundle(
            prep.bundle, prep.clustering, prep.uq_scores, calibration
        )
        scores.append(report.renyi_semantic_calibrated)
    median = float(np.median(scores))
    labels = [score < median for score in scores]
    rng = np.random.default_rng(seed)
    n_flip = int(round(flip_fraction * len(bundles)))
    flip_at = rng.choice(len(bundles), size=n_flip, replace=False) if n_flip else []
    for idx in flip_at:
        labels[idx] = not labels[idx]
    for bundle, label in zip(bundles, labels):
        for gen in bundle.generations:
            gen.is_correct = bool(label)
    return PlantedCorpus(
        bundles=bundles,
        prepared=prepared,
        planted_scores=scores,
        n_flipped=int(n_flip),
    )


def make_demo_corpus(
    n_questions: int = 40,
    n_generations: int = 8,
    seed: int = 7,
    config: RunConfig | None = None,
    lambda_star: float = 1.0,
    flip_fraction: float = 0.1,
    n_scenarios: int = 1,
) -> tuple[list[QuestionBundle], RunConfig, PlantedCorpus]:
    """Labeled corpus plus the config that scored it, ready for evaluation."""
    if config is None:
        config = RunConfig(spins=4, seed=seed)
    bundles = random_corpus(
        n_questions, n_generations, seed=seed, n_scenarios=n_scenarios
    )
    planted = plant_labels(
        bundles, config, lambda_star=lambda_star,
        flip_fraction=flip_fraction, seed=seed + 1,
    )
    return bundles, config, planted
