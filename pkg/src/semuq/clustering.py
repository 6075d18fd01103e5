"""Semantic-equivalence clustering by greedy bidirectional entailment.

Generations are scanned once in input order; each is compared against the
founding member of every existing cluster and joins the first cluster whose
representative it mutually entails, else founds a new one.  Entailment
judgments come from a pluggable backend: a deterministic exact-match
normalizer, a precomputed verdict matrix, or an HTTP judging service.
"""

from __future__ import annotations

import dataclasses
import json
import re
import string
from typing import Protocol, runtime_checkable

import requests

from semuq.errors import (
    DegenerateInputError,
    ProtocolError,
    SemuqError,
    TransportError,
    ValidationError,
)
from semuq.records import QuestionBundle

VERDICTS = ("entailment", "contradiction", "neutral")

# Default prompt sent to the judging service; placeholders are filled per pair.
DEFAULT_ENTAILMENT_TEMPLATE = (
    "We are evaluating answers to the question: {question}\n"
    "\n"
    "Here are two possible answers:\n"
    "Possible Answer 1: {text1}\n"
    "Possible Answer 2: {text2}\n"
    "\n"
    "Does Possible Answer 1 semantically entail Possible Answer 2?\n"
    "Respond with: entailment, contradiction, or neutral."
)

_WHITESPACE_RUN = re.compile(r"\s+")


@runtime_checkable
class EntailmentBackend(Protocol):
    """Anything with a kind tag and a directional judge method."""

    kind: str

    def judge(self, question: str, text1: str, text2: str) -> str: ...


@dataclasses.dataclass
class Cluster:
    cluster_id: int
    member_indices: list[int]
    representative_index: int


@dataclasses.dataclass
class SemanticClustering:
    clusters: list[Cluster]

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def n_generations(self) -> int:
        return sum(len(c.member_indices) for c in self.clusters)

    def sizes(self) -> list[int]:
        return [len(c.member_indices) for c in self.clusters]

    def labels(self) -> list[int]:
        """Cluster id per generation index."""
        out = [-1] * self.n_generations
        for cluster in self.clusters:
            for index in cluster.member_indices:
                out[index] = cluster.cluster_id
        return out

    def validate_partition(self, n_generations: int) -> None:
        seen: set[int] = set()
        for cluster in self.clusters:
            if cluster.representative_index not in cluster.member_indices:
                raise ValidationError(
                    f"cluster {cluster.cluster_id} representative is not a member"
                )
            if cluster.representative_index != cluster.member_indices[0]:
                raise ValidationError(
                    f"cluster {cluster.cluster_id} representative is not its first member"
                )
            for index in cluster.member_indices:
                if index in seen:
                    raise ValidationError(f"generation {index} assigned to multiple clusters")
                seen.add(index)
        if seen != set(range(n_generations)):
            raise ValidationError(
                f"clusters cover {sorted(seen)} but the bundle has {n_generations} generations"
            )


class ExactMatchBackend:
    """Entailment by normalized string equality; a deterministic test backend."""

    kind = "exact-match"

    def __init__(
        self,
        lowercase: bool = True,
        strip: bool = True,
        collapse_whitespace: bool = True,
        strip_terminal_punctuation: bool = True,
    ):
        self.lowercase = lowercase
        self.strip = strip
        self.collapse_whitespace = collapse_whitespace
        self.strip_terminal_punctuation = strip_terminal_punctuation

    def normalize(self, text: str) -> str:
        if self.lowercase:
            text = text.lower()
        if self.collapse_whitespace:
            text = _WHITESPACE_RUN.sub(" ", text)
        if self.strip:
            text = text.strip()
        if self.strip_terminal_punctuation:
            text = text.rstrip(string.punctuation)
        return text

    def judge(self, question: str, text1: str, text2: str) -> str:
        return "entailment" if self.normalize(text1) == self.normalize(text2) else "neutral"


class PrecomputedMatrixBackend:
    """Entailment verdicts read from a square directional matrix.

    verdicts[i][j] is the verdict for texts[i] => texts[j]; the diagonal must
    be entailment.  Duplicate texts resolve to their first occurrence.
    """

    kind = "precomputed-matrix"

    def __init__(self, texts: list[str], verdicts: list[list[str]]):
        n = len(texts)
        if len(verdicts) != n or any(len(row) != n for row in verdicts):
            raise ValidationError(
                f"verdict matrix must be square with side {n} (one row per text)"
            )
        for i, row in enumerate(verdicts):
            for j, verdict in enumerate(row):
                if verdict not in VERDICTS:
                    raise ValidationError(
                        f"verdict matrix entry ({i}, {j}) is {verdict!r}; expected one of {VERDICTS}"
                    )
            if verdicts[i][i] != "entailment":
                raise ValidationError(f"verdict matrix diagonal entry {i} must be 'entailment'")
        self._verdicts = [list(row) for row in verdicts]
        self._index: dict[str, int] = {}
        for i, text in enumerate(texts):
            self._index.setdefault(text, i)

    def judge(self, question: str, text1: str, text2: str) -> str:
        try:
            i, j = self._index[text1], self._index[text2]
        except KeyError as exc:
            raise ValidationError(f"text not covered by the verdict matrix: {exc.args[0]!r}") from exc
        return self._verdicts[i][j]


class ExternalServiceBackend:
    """Entailment from an HTTP judging service.

    POSTs JSON {question, text1, text2, template} and expects {"verdict": ...}
    with one of the three verdict strings.
    """

    kind = "external-service"

    def __init__(
        self,
        endpoint: str,
        template: str = DEFAULT_ENTAILMENT_TEMPLATE,
        max_attempts: int = 3,
        timeout: float = 30.0,
    ):
        if max_attempts < 1:
            raise ValidationError(f"max_attempts must be >= 1, got {max_attempts}")
        self.endpoint = endpoint
        self.template = template
        self.max_attempts = max_attempts
        self.timeout = timeout

    def judge(self, question: str, text1: str, text2: str) -> str:
        payload = {
            "question": question,
            "text1": text1,
            "text2": text2,
            "template": self.template,
        }
        last_error: Exception | None = None
        for _ in range(self.max_attempts):
            try:
                response = requests.post(self.endpoint, json=payload, timeout=self.timeout)
                response.raise_for_status()
            except requests.RequestException as exc:
                last_error = exc
                continue
            return self._parse_verdict(response.text)
        raise TransportError(
            f"entailment service at {self.endpoint} failed after {self.max_attempts} attempts: "
            f"{last_error}"
        )

    @staticmethod
    def _parse_verdict(raw: str) -> str:
        try:
            data = json.loads(raw)
        except json.JSONDecodeError:
            raise ProtocolError(
                f"entailment service returned non-JSON payload: {raw[:200]!r}", raw_response=raw
            ) from None
        verdict = data.get("verdict") if isinstance(data, dict) else None
        if isinstance(verdict, str) and verdict.strip().lower() in VERDICTS:
            return verdict.strip().lower()
        raise ProtocolError(
            f"entailment service verdict not recognized: {verdict!r}", raw_response=raw
        )


def bidirectional_entails(backend, question: str, a: str, b: str) -> bool:
    """True iff the backend judges a => b and b => a both as entailment."""
    if not a or not b:
        raise ValidationError("entailment comparison requires two nonempty texts")
    return (
        backend.judge(question, a, b) == "entailment"
        and backend.judge(question, b, a) == "entailment"
    )


def assign_clusters(bundle: QuestionBundle, backend) -> SemanticClustering:
    """Greedy single-pass clustering against cluster representatives.

    Deterministic for a fixed generation order; intransitive backend verdicts
    are resolved implicitly by arrival order.
    """
    clusters: list[Cluster] = []
    for i, gen in enumerate(bundle.generations):
        placed = False
        for cluster in clusters:
            rep_index = cluster.representative_index
            rep_text = bundle.generations[rep_index].text
            try:
                merged = bidirectional_entails(backend, bundle.prompt, gen.text, rep_text)
            except SemuqError as exc:
                raise type(exc)(
                    f"entailment check failed for generation pair ({i}, {rep_index}): {exc}"
                ) from exc
            if merged:
                cluster.member_indices.append(i)
                placed = True
                break
        if not placed:
            clusters.append(Cluster(cluster_id=len(clusters), member_indices=[i], representative_index=i))
    return SemanticClustering(clusters)


def clustering_from_records(bundle: QuestionBundle) -> SemanticClustering:
    """Rebuild a clustering from per-generation cluster_id fields.

    Recorded ids may use any labeling scheme; they are relabeled 0..K-1 in
    first-appearance order, with the first member as representative.
    """
    by_recorded_id: dict[int, Cluster] = {}
    for i, gen in enumerate(bundle.generations):
        if gen.cluster_id is None:
            raise ValidationError(
                f"bundle '{bundle.question_id}' generation {i} carries no cluster_id; "
                "cannot use recorded clustering"
            )
        cluster = by_recorded_id.get(gen.cluster_id)
        if cluster is None:
            cluster = Cluster(cluster_id=len(by_recorded_id), member_indices=[], representative_index=i)
            by_recorded_id[gen.cluster_id] = cluster
        cluster.member_indices.append(i)
    return SemanticClustering(list(by_recorded_id.values()))


def cluster_probabilities(clustering: SemanticClustering, bundle: QuestionBundle) -> list[float]:
    """Per-cluster share of the normalized sequence-probability mass."""
    for i, gen in enumerate(bundle.generations):
        if gen.norm_seq_prob is None:
            raise ValidationError(
                f"generation {i} has no norm_seq_prob; normalize the bundle first"
            )
    masses = [
        sum(bundle.generations[i].norm_seq_prob for i in cluster.member_indices)
        for cluster in clustering.clusters
    ]
    total = sum(masses)
    if total <= 0:
        raise DegenerateInputError("cluster probability mass is zero")
    return [mass / total for mass in masses]


def discrete_cluster_probabilities(clustering: SemanticClustering) -> list[float]:
    """Per-cluster membership fraction |c| / R."""
    n = clustering.n_generations
    if n == 0:
        raise DegenerateInputError("clustering has no members")
    return [len(cluster.member_indices) / n for cluster in clustering.clusters]
