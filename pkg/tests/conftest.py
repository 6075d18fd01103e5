"""Shared fixture builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from semuq.kme import dyadic_grid, empirical_kme, l2_normalize
from semuq.records import GenerationRecord, QuestionBundle


def make_bundle(
    raws,
    cluster_ids=None,
    labels=None,
    texts=None,
    qid="q-test",
    prompt="test prompt",
    scenario=None,
) -> QuestionBundle:
    """Bundle from parallel per-generation value lists; None lists are omitted."""
    n = len(raws)
    if texts is None:
        texts = [f"answer {i}" for i in range(n)]
    generations = []
    for i in range(n):
        generations.append(
            GenerationRecord(
                text=texts[i],
                raw_seq_prob=float(raws[i]),
                cluster_id=None if cluster_ids is None else int(cluster_ids[i]),
                is_correct=None if labels is None else bool(labels[i]),
            )
        )
    metadata = {} if scenario is None else {"scenario": scenario}
    bundle = QuestionBundle(
        question_id=qid, prompt=prompt, generations=generations, metadata=metadata
    )
    bundle.normalize()
    return bundle


def random_kme_state(rng: np.random.Generator, L: int, sigma: float = 0.05) -> np.ndarray:
    """Unit-norm embedding amplitudes from a random handful of samples in [0, 1]."""
    n_samples = int(rng.integers(3, 13))
    samples = rng.uniform(0.0, 1.0, n_samples)
    wf = l2_normalize(empirical_kme(samples, dyadic_grid(L), sigma))
    return wf.values


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260821)
