"""A fully worked ten-generation scoring example with golden expected values.

The fixture is a question answered ten times, with raw sequence
probabilities, recorded semantic clusters, and externally supplied
calibrated cluster probabilities.  The calibrated values are consumed as
given: re-deriving them would need the uncertainty inputs and calibration
weight that produced them, which are not part of the fixture.  Everything
else (normalization, cluster masses, all entropy totals) is recomputed
here and checked against the goldens.
"""

from __future__ import annotations

import dataclasses
import math

from semuq.clustering import cluster_probabilities, clustering_from_records
from semuq.entropy import (
    naive_entropy,
    normalize_base,
    renyi_semantic_entropy,
    shannon_semantic_entropy,
    squared_cluster_terms,
)
from semuq.records import GenerationRecord, QuestionBundle

EXAMPLE_QUESTION = "Which oil producer is a close ally of the United States?"

# (text, recorded cluster id, raw sequence probability)
EXAMPLE_ROWS: tuple[tuple[str, int, float], ...] = (
    ("Russia", 1, 0.05899),
    ("Saudi Arabia", 2, 0.57761),
    ("Saudi Arabia", 2, 0.57761),
    ("Iran", 3, 0.07227),
    ("Saudi Arabia", 2, 0.57761),
    ("Kuwait", 4, 0.08940),
    ("Qatar", 5, 0.02185),
    ("Saudi Arabia", 2, 0.57761),
    ("Iraq", 6, 0.12086),
    ("Saudi Arabia", 2, 0.57761),
)

# calibrated cluster probabilities, keyed by recorded cluster id, as given
CALIBRATED_CLUSTER_PROBS: dict[int, float] = {
    1: 0.02223,
    2: 0.85880,
    3: 0.02697,
    4: 0.03488,
    5: 0.01214,
    6: 0.04498,
}

# expected totals (base 10) and intermediates, with check tolerances
GOLDEN_TOTALS = {
    "naive_entropy": 0.84557,
    "shannon_semantic": 0.22471,
    "renyi_semantic_calibrated": 0.12951,
}
GOLDEN_INTERMEDIATES = {
    "top_normalized_prob": 0.17765,
    "top_cluster_prob": 0.88824,
    "top_calibrated_term": 0.73754,
}
TOTAL_TOLERANCE = 5e-4
INTERMEDIATE_TOLERANCE = 5e-5


def example_bundle() -> QuestionBundle:
    generations = [
        GenerationRecord(text=text, raw_seq_prob=raw, cluster_id=cid)
        for text, cid, raw in EXAMPLE_ROWS
    ]
    bundle = QuestionBundle(
        question_id="worked-example",
        prompt=EXAMPLE_QUESTION,
        generations=generations,
        metadata={"source": "embedded fixture"},
    )
    bundle.validate()
    return bundle


@dataclasses.dataclass
class WorkedExample:
    bundle: QuestionBundle
    norm_probs: list[float]
    cluster_ids: list[int]  # recorded id per cluster, first-appearance order
    cluster_probs: list[float]
    calibrated_probs: list[float]
    naive_entropy: float
    shannon_semantic: float
    renyi_semantic: float
    renyi_semantic_calibrated: float
    per_cluster_terms: list[float]
    log_base: str


def compute_worked_example(base=10, raw_nudge: float = 0.0) -> WorkedExample:
    """Recompute the example end to end; ``raw_nudge`` shifts the first raw
    probability and exists so failure paths can be exercised."""
    base_tag = normalize_base(base)
    bundle = example_bundle()
    if raw_nudge:
        bundle.generations[0].raw_seq_prob += raw_nudge
    bundle.normalize()
    clustering = clustering_from_records(bundle)
    norm = bundle.normalized_probabilities()

    cluster_probs = cluster_probabilities(clustering, bundle)

    recorded_ids = [
        bundle.generations[cluster.representative_index].cluster_id
        for cluster in clustering.clusters
    ]
    calibrated = [CALIBRATED_CLUSTER_PROBS[cid] for cid in recorded_ids]

    return WorkedExample(
        bundle=bundle,
        norm_probs=norm,
        cluster_ids=recorded_ids,
        cluster_probs=cluster_probs,
        calibrated_probs=calibrated,
        naive_entropy=naive_entropy(norm, base=base),
        shannon_semantic=shannon_semantic_entropy(cluster_probs, base=base),
        renyi_semantic=renyi_semantic_entropy(cluster_probs, base=base),
        renyi_semantic_calibrated=renyi_semantic_entropy(calibrated, base=base),
        per_cluster_terms=squared_cluster_terms(calibrated),
        log_base=base_tag,
    )


@dataclasses.dataclass
class GoldenCheck:
    name: str
    got: float
    want: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return abs(self.got - self.want) <= self.tolerance


def check_goldens(result: WorkedExample) -> list[GoldenCheck]:
    """All six golden comparisons; natural-log goldens are the base-10 ones
    scaled by ln 10 (tolerances scaled to match)."""
    scale = math.log(10.0) if result.log_base == "e" else 1.0
    checks = [
        GoldenCheck(
            "naive_entropy",
            result.naive_entropy,
            GOLDEN_TOTALS["naive_entropy"] * scale,
            TOTAL_TOLERANCE * scale,
        ),
        GoldenCheck(
            "shannon_semantic",
            result.shannon_semantic,
            GOLDEN_TOTALS["shannon_semantic"] * scale,
            TOTAL_TOLERANCE * scale,
        ),
        GoldenCheck(
            "renyi_semantic_calibrated",
            result.renyi_semantic_calibrated,
            GOLDEN_TOTALS["renyi_semantic_calibrated"] * scale,
            TOTAL_TOLERANCE * scale,
        ),
        GoldenCheck(
            "top_normalized_prob",
            max(result.norm_probs),
            GOLDEN_INTERMEDIATES["top_normalized_prob"],
            INTERMEDIATE_TOLERANCE,
        ),
        GoldenCheck(
            "top_cluster_prob",
            max(result.cluster_probs),
            GOLDEN_INTERMEDIATES["top_cluster_prob"],
            INTERMEDIATE_TOLERANCE,
        ),
        GoldenCheck(
            "top_calibrated_term",
            max(result.per_cluster_terms),
            GOLDEN_INTERMEDIATES["top_calibrated_term"],
            INTERMEDIATE_TOLERANCE,
        ),
    ]
    return checks


def render_table(result: WorkedExample) -> str:
    """Plain-text table mirroring the fixture layout, 5 decimal places."""
    by_cluster = {cid: k for k, cid in enumerate(result.cluster_ids)}
    seen: set[int] = set()
    header = (
        f"{'generation':<14} {'cluster':>7} {'raw':>9} {'norm':>9} "
        f"{'p_cluster':>10} {'p_adjusted':>10}"
    )
    lines = [f"question: {result.bundle.prompt}", header, "-" * len(header)]
    for i, gen in enumerate(result.bundle.generations):
        k = by_cluster[gen.cluster_id]
        first = gen.cluster_id not in seen
        seen.add(gen.cluster_id)
        p_c = f"{result.cluster_probs[k]:10.5f}" if first else f"{'--':>10}"
        p_a = f"{result.calibrated_probs[k]:10.5f}" if first else f"{'--':>10}"
        lines.append(
            f"{gen.text:<14} {gen.cluster_id:>7} {gen.raw_seq_prob:>9.5f} "
            f"{result.norm_probs[i]:>9.5f} {p_c} {p_a}"
        )
    lines.append("-" * len(header))
    base_note = "base 10" if result.log_base == "10" else "natural log"
    lines.append(f"entropies ({base_note}):")
    lines.append(f"  naive                {result.naive_entropy:.5f}")
    lines.append(f"  semantic shannon     {result.shannon_semantic:.5f}")
    lines.append(f"  semantic quadratic   {result.renyi_semantic:.5f}")
    lines.append(f"  calibrated quadratic {result.renyi_semantic_calibrated:.5f}")
    return "\n".join(lines)
