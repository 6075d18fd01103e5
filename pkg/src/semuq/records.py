"""Record types for generations, question bundles, and experiment runs.

Storage format is line-delimited JSON, one question bundle per line, with
the canonical generation fields ``text``, ``token_log_probs``,
``raw_seq_prob``, ``cluster_id``, ``is_correct``.  Token log-probabilities
are natural-log; entropy bases are a downstream concern.  Normalized
sequence probabilities are never stored; they are recomputed on load, so a
write/read round trip is structurally exact.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from typing import Any, Iterable, TextIO

from semuq.errors import ValidationError

# raw_seq_prob must agree with exp(sum(token_log_probs)) to this relative tolerance
RAW_VS_TOKENS_RTOL = 1e-9


@dataclasses.dataclass
class GenerationRecord:
    """One sampled answer with its sequence probability bookkeeping."""

    text: str
    raw_seq_prob: float
    token_log_probs: list[float] | None = None
    norm_seq_prob: float | None = None
    cluster_id: int | None = None
    is_correct: bool | None = None

    def validate(self) -> None:
        if not isinstance(self.text, str):
            raise ValidationError("generation field 'text' must be a string")
        if not (isinstance(self.raw_seq_prob, (int, float)) and math.isfinite(self.raw_seq_prob)):
            raise ValidationError("generation field 'raw_seq_prob' must be a finite number")
        if self.raw_seq_prob <= 0:
            raise ValidationError(
                f"generation field 'raw_seq_prob' must be positive, got {self.raw_seq_prob}"
            )
        if self.token_log_probs is not None:
            log_prob = sequence_log_probability(self.token_log_probs)
            reconstructed = math.exp(log_prob)
            if abs(reconstructed - self.raw_seq_prob) > RAW_VS_TOKENS_RTOL * self.raw_seq_prob:
                raise ValidationError(
                    "generation field 'raw_seq_prob' disagrees with its token log-probabilities: "
                    f"stored {self.raw_seq_prob!r}, product of token probabilities {reconstructed!r}"
                )
        if self.cluster_id is not None and (not isinstance(self.cluster_id, int) or self.cluster_id < 0):
            raise ValidationError(
                f"generation field 'cluster_id' must be a nonnegative integer, got {self.cluster_id!r}"
            )
        if self.is_correct is not None and not isinstance(self.is_correct, bool):
            raise ValidationError(
                f"generation field 'is_correct' must be a boolean, got {self.is_correct!r}"
            )
        if self.norm_seq_prob is not None and not (0.0 < self.norm_seq_prob <= 1.0):
            raise ValidationError(
                f"generation field 'norm_seq_prob' must lie in (0, 1], got {self.norm_seq_prob!r}"
            )


@dataclasses.dataclass
class QuestionBundle:
    """All repeated generations for one question, plus labels and tags."""

    question_id: str
    prompt: str
    generations: list[GenerationRecord]
    metadata: dict[str, str] = dataclasses.field(default_factory=dict)

    @property
    def n_generations(self) -> int:
        return len(self.generations)

    def validate(self) -> None:
        if not isinstance(self.question_id, str) or not self.question_id:
            raise ValidationError("bundle field 'question_id' must be a nonempty string")
        if not isinstance(self.prompt, str):
            raise ValidationError("bundle field 'prompt' must be a string")
        if not self.generations:
            raise ValidationError(f"bundle '{self.question_id}' has no generations")
        for key, value in self.metadata.items():
            if not isinstance(key, str) or not isinstance(value, str):
                raise ValidationError(
                    f"bundle '{self.question_id}' metadata must map strings to strings"
                )
        for gen in self.generations:
            gen.validate()
        norms = [g.norm_seq_prob for g in self.generations]
        if all(n is not None for n in norms):
            total = sum(norms)
            if abs(total - 1.0) > 1e-9:
                raise ValidationError(
                    f"bundle '{self.question_id}' normalized probabilities sum to {total}, not 1"
                )

    def normalize(self) -> None:
        """Fill norm_seq_prob from the raw values (idempotent re-derivation)."""
        normalized = normalize_sequence_probabilities([g.raw_seq_prob for g in self.generations])
        for gen, value in zip(self.generations, normalized):
            gen.norm_seq_prob = value

    def normalized_probabilities(self) -> list[float]:
        if any(g.norm_seq_prob is None for g in self.generations):
            self.normalize()
        return [g.norm_seq_prob for g in self.generations]

    def fully_labeled(self) -> bool:
        return all(g.is_correct is not None for g in self.generations)


@dataclasses.dataclass
class ExperimentRun:
    """A scored corpus: bundles plus per-method, per-question uncertainty scores."""

    bundles: list[QuestionBundle]
    method_scores: dict[str, dict[str, float]] = dataclasses.field(default_factory=dict)
    config: dict[str, Any] = dataclasses.field(default_factory=dict)

    def validate(self) -> None:
        ids = [b.question_id for b in self.bundles]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate question_id values in run: {dupes}")
        known = set(ids)
        for method, scores in self.method_scores.items():
            missing = sorted(set(scores) - known)
            if missing:
                raise ValidationError(
                    f"method '{method}' scores reference unknown question_ids: {missing}"
                )


def sequence_log_probability(token_log_probs: Iterable[float]) -> float:
    """Sum of per-token natural-log probabilities (log of the sequence product)."""
    total = 0.0
    for index, value in enumerate(token_log_probs):
        if not (isinstance(value, (int, float)) and math.isfinite(value)):
            raise ValidationError(f"non-finite token log-probability at index {index}: {value!r}")
        if value > 0:
            raise ValidationError(
                f"token log-probability at index {index} is positive ({value!r}); "
                "log-probabilities must be <= 0"
            )
        total += value
    return total


def normalize_sequence_probabilities(raw: Iterable[float]) -> list[float]:
    """Scale positive raw sequence probabilities to sum to one."""
    values = list(raw)
    if not values:
        raise ValidationError("cannot normalize an empty probability list")
    for index, value in enumerate(values):
        if not (isinstance(value, (int, float)) and math.isfinite(value)) or value <= 0:
            raise ValidationError(
                f"raw sequence probability at index {index} must be positive and finite, got {value!r}"
            )
    total = sum(values)
    return [v / total for v in values]


def _generation_to_dict(gen: GenerationRecord) -> dict[str, Any]:
    out: dict[str, Any] = {"text": gen.text, "raw_seq_prob": gen.raw_seq_prob}
    if gen.token_log_probs is not None:
        out["token_log_probs"] = gen.token_log_probs
    if gen.cluster_id is not None:
        out["cluster_id"] = gen.cluster_id
    if gen.is_correct is not None:
        out["is_correct"] = gen.is_correct
    return out


def _generation_from_dict(data: dict[str, Any]) -> GenerationRecord:
    if not isinstance(data, dict):
        raise ValidationError(f"generation entry must be an object, got {type(data).__name__}")
    if "text" not in data:
        raise ValidationError("generation entry is missing required field 'text'")
    token_log_probs = data.get("token_log_probs")
    raw = data.get("raw_seq_prob")
    if raw is None:
        # raw probability derived from the token-level record when absent
        if token_log_probs is None:
            raise ValidationError(
                "generation entry needs 'raw_seq_prob' or 'token_log_probs'; both are missing"
            )
        raw = math.exp(sequence_log_probability(token_log_probs))
    gen = GenerationRecord(
        text=data["text"],
        raw_seq_prob=float(raw),
        token_log_probs=list(token_log_probs) if token_log_probs is not None else None,
        cluster_id=data.get("cluster_id"),
        is_correct=data.get("is_correct"),
    )
    gen.validate()
    return gen


def bundle_to_dict(bundle: QuestionBundle) -> dict[str, Any]:
    return {
        "question_id": bundle.question_id,
        "prompt": bundle.prompt,
        "generations": [_generation_to_dict(g) for g in bundle.generations],
        "metadata": dict(bundle.metadata),
    }


def bundle_from_dict(data: dict[str, Any]) -> QuestionBundle:
    if not isinstance(data, dict):
        raise ValidationError(f"bundle record must be an object, got {type(data).__name__}")
    generations = data.get("generations")
    if not isinstance(generations, list) or not generations:
        raise ValidationError("bundle field 'generations' must be a nonempty list")
    bundle = QuestionBundle(
        question_id=data.get("question_id", ""),
        prompt=data.get("prompt", ""),
        generations=[_generation_from_dict(g) for g in generations],
        metadata=dict(data.get("metadata") or {}),
    )
    bundle.normalize()
    bundle.validate()
    return bundle


def load_bundles(path: str, fmt: str = "jsonl") -> list[QuestionBundle]:
    """Read question bundles from a line-delimited JSON file.

    Raw probabilities are the source of truth when token log-probabilities are
    absent; normalization is applied on load.
    """
    if fmt != "jsonl":
        raise ValidationError(f"unknown bundle format {fmt!r}; supported: 'jsonl'")
    bundles: list[QuestionBundle] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{line_no}: malformed JSON: {exc}") from exc
            try:
                bundles.append(bundle_from_dict(data))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{line_no}: {exc}") from exc
    return bundles


def save_bundles(
    bundles: Iterable[QuestionBundle], path_or_handle: str | os.PathLike | TextIO
) -> None:
    """Write question bundles as line-delimited JSON (canonical fields only)."""
    if isinstance(path_or_handle, (str, os.PathLike)):
        with open(path_or_handle, "w", encoding="utf-8") as handle:
            _write_bundles(bundles, handle)
    else:
        _write_bundles(bundles, path_or_handle)


def _write_bundles(bundles: Iterable[QuestionBundle], handle: TextIO) -> None:
    for bundle in bundles:
        handle.write(json.dumps(bundle_to_dict(bundle)) + "\n")


def run_to_dict(run: ExperimentRun) -> dict[str, Any]:
    return {
        "bundles": [bundle_to_dict(b) for b in run.bundles],
        "method_scores": {m: dict(s) for m, s in run.method_scores.items()},
        "config": dict(run.config),
    }


def run_from_dict(data: dict[str, Any]) -> ExperimentRun:
    run = ExperimentRun(
        bundles=[bundle_from_dict(b) for b in data.get("bundles", [])],
        method_scores={m: dict(s) for m, s in (data.get("method_scores") or {}).items()},
        config=dict(data.get("config") or {}),
    )
    run.validate()
    return run


def save_run(run: ExperimentRun, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(run_to_dict(run), handle)
        handle.write("\n")


def load_run(path: str) -> ExperimentRun:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: malformed JSON: {exc}") from exc
    return run_from_dict(data)
