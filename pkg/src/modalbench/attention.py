"""Attention attribution: how much averaged attention lands on each modality.

Each output token contributes one attention row over all preceding positions.
Rows are normalized to sum to 1, averaged per position over the shared prompt
prefix, and the averaged mass is summed over the image/question/context token
spans to produce relative relevance scores that sum to 1.

Rows grow with the output, so the average is restricted to the prefix
positions present in every row; positions outside the three modality spans
(system/instruction tokens, answer tokens in reasoning traces) are tracked as
"other" mass and excluded from the relative normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateRow, EmptyBatch, EmptySpans
from .traces import GenerationRecord, Span, prefix_length


@dataclass(frozen=True)
class RelevanceScores:
    """Relative attention shares per modality, plus the absolute masses.

    ``r_image + r_question + r_context = 1`` (up to float tolerance);
    ``r_context`` is 0 for records without a context span. ``raw_mass`` holds
    the averaged attention mass per modality before the relative
    normalization, with everything outside the three spans under "other".
    """

    r_image: float
    r_question: float
    r_context: float
    raw_mass: dict[str, float]
    has_context: bool


def average_attention_vector(record: GenerationRecord) -> np.ndarray:
    """Normalize each attention row to sum 1 and average over the prefix.

    Returns a vector of length ``prefix_length`` (first-prompt length for
    answers; prompt + answer + second prompt for reasoning). Raises
    :class:`DegenerateRow` for any row with zero total mass.
    """
    if not record.attention_rows:
        raise ValueError("record has no output tokens to average over")
    prefix = prefix_length(record.span_map, record.task)
    total = np.zeros(prefix, dtype=np.float64)
    for t, row in enumerate(record.attention_rows):
        values = np.asarray(row, dtype=np.float64)
        row_sum = values.sum()
        if row_sum <= 0.0:
            raise DegenerateRow(t)
        total += values[:prefix] / row_sum
    return total / len(record.attention_rows)


def _span_mass(vector: np.ndarray, span: Span | None) -> float:
    if span is None:
        return 0.0
    start, end = span
    return float(vector[start:end].sum())


def relevance(record: GenerationRecord) -> RelevanceScores:
    """Relative relevance of image, question, and context for one record."""
    vector = average_attention_vector(record)
    span_map = record.span_map
    mass_image = _span_mass(vector, span_map.image_span)
    mass_question = _span_mass(vector, span_map.question_span)
    mass_context = _span_mass(vector, span_map.context_span)
    mass_total = float(vector.sum())

    denominator = mass_image + mass_question + mass_context
    if denominator <= 0.0:
        raise EmptySpans("image, question, and context spans carry no attention mass")

    context_span = span_map.context_span
    return RelevanceScores(
        r_image=mass_image / denominator,
        r_question=mass_question / denominator,
        r_context=mass_context / denominator,
        raw_mass={
            "image": mass_image,
            "question": mass_question,
            "context": mass_context,
            "other": mass_total - denominator,
        },
        has_context=context_span is not None and context_span[1] > context_span[0],
    )


@dataclass(frozen=True)
class AttentionDifferences:
    """Per-record and mean attention-share gaps between image and text inputs.

    ``image_minus_context`` covers only context-bearing records;
    ``mean_image_minus_context`` is ``None`` when no record has a context.
    """

    image_minus_question: tuple[float, ...]
    image_minus_context: tuple[float, ...]
    mean_image_minus_question: float
    mean_image_minus_context: float | None


def attention_differences(batch: Sequence[RelevanceScores]) -> AttentionDifferences:
    """Mean and per-record differences R_image - R_question / R_context."""
    if not batch:
        raise EmptyBatch("attention_differences needs at least one record")
    iq = tuple(s.r_image - s.r_question for s in batch)
    ic = tuple(s.r_image - s.r_context for s in batch if s.has_context)
    return AttentionDifferences(
        image_minus_question=iq,
        image_minus_context=ic,
        mean_image_minus_question=float(np.mean(iq)),
        mean_image_minus_context=float(np.mean(ic)) if ic else None,
    )
