from __future__ import annotations

import numpy as np
import pytest

from modalbench.attention import (
    attention_differences,
    average_attention_vector,
    relevance,
)
from modalbench.errors import DegenerateRow, EmptyBatch, EmptySpans
from modalbench.traces import GenerationRecord, Sampling, SpanMap, prefix_length

from conftest import random_record
from oracles import brute_force_relevance


def record_with_rows(rows, image_span, question_span, context_span=None, n0=None):
    if n0 is None:
        n0 = len(rows[0])
    span_map = SpanMap(image_span=image_span, question_span=question_span,
                       context_span=context_span, n0=n0)
    return GenerationRecord(
        task="answer",
        output_tokens=tuple("t" for _ in rows),
        token_logprobs=tuple(-0.1 for _ in rows),
        attention_rows=tuple(tuple(float(v) for v in row) for row in rows),
        span_map=span_map,
        sampling=Sampling(temperature=0.0, index=0),
    )


class TestAverageVector:
    def test_uniform_single_row(self):
        record = record_with_rows([[2, 2, 2, 2]], (0, 2), (2, 4))
        assert average_attention_vector(record).tolist() == [0.25, 0.25, 0.25, 0.25]

    def test_two_rows_of_different_length(self):
        # Normalized rows [0.5, 0.5] and [0.25, 0.25, 0.5]; averaged over the
        # two shared prefix positions.
        record = record_with_rows([[1, 1], [1, 1, 2]], (0, 1), (1, 2), n0=2)
        assert average_attention_vector(record).tolist() == [0.375, 0.375]

    def test_scaling_all_rows_leaves_vector_unchanged(self):
        rng = np.random.default_rng(0)
        record = random_record(rng, "answer")
        baseline = average_attention_vector(record)
        scaled = GenerationRecord(
            task=record.task,
            output_tokens=record.output_tokens,
            token_logprobs=record.token_logprobs,
            attention_rows=tuple(tuple(v * 3.7 for v in row)
                                 for row in record.attention_rows),
            span_map=record.span_map,
            sampling=record.sampling,
        )
        assert np.allclose(average_attention_vector(scaled), baseline, atol=1e-12)

    def test_power_of_two_scaling_is_bit_exact(self):
        rng = np.random.default_rng(1)
        for factor in (2.0, 0.5, 1024.0):
            record = random_record(rng, "answer")
            baseline = average_attention_vector(record)
            scaled = GenerationRecord(
                task=record.task,
                output_tokens=record.output_tokens,
                token_logprobs=record.token_logprobs,
                attention_rows=tuple(tuple(v * factor for v in row)
                                     for row in record.attention_rows),
                span_map=record.span_map,
                sampling=record.sampling,
            )
            assert (average_attention_vector(scaled) == baseline).all()

    def test_zero_sum_row_is_an_error(self):
        record = record_with_rows([[1, 1], [0, 0, 0]], (0, 1), (1, 2), n0=2)
        with pytest.raises(DegenerateRow) as excinfo:
            average_attention_vector(record)
        assert excinfo.value.token_index == 1

    def test_reasoning_vector_covers_full_prefix(self):
        rng = np.random.default_rng(2)
        record = random_record(rng, "reasoning")
        vector = average_attention_vector(record)
        assert len(vector) == prefix_length(record.span_map, "reasoning")


class TestRelevance:
    def test_even_mass_splits_by_span_size(self):
        record = record_with_rows([[1, 1, 1, 1]], (0, 2), (2, 3), (3, 4))
        scores = relevance(record)
        assert scores.r_image == pytest.approx(0.5, abs=1e-12)
        assert scores.r_question == pytest.approx(0.25, abs=1e-12)
        assert scores.r_context == pytest.approx(0.25, abs=1e-12)
        assert scores.has_context

    def test_all_mass_on_image(self):
        record = record_with_rows([[1, 1, 0, 0]], (0, 2), (2, 3), (3, 4))
        scores = relevance(record)
        assert scores.r_image == 1.0
        assert scores.r_question == 0.0
        assert scores.r_context == 0.0

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            record = random_record(rng, "answer" if rng.integers(2) else "reasoning")
            scores = relevance(record)
            expected = brute_force_relevance(
                [list(row) for row in record.attention_rows],
                record.span_map.image_span,
                record.span_map.question_span,
                record.span_map.context_span,
                prefix_length(record.span_map, record.task),
            )
            assert scores.r_image == pytest.approx(expected[0], abs=1e-12)
            assert scores.r_question == pytest.approx(expected[1], abs=1e-12)
            assert scores.r_context == pytest.approx(expected[2], abs=1e-12)

    def test_scores_sum_to_one(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            record = random_record(rng, "answer")
            scores = relevance(record)
            assert scores.r_image + scores.r_question + scores.r_context == \
                pytest.approx(1.0, abs=1e-9)
            if not scores.has_context:
                assert scores.r_context == 0.0

    def test_other_mass_tracks_out_of_span_positions(self):
        # Prefix of 5 with one instruction position outside all spans.
        record = record_with_rows([[1, 1, 1, 1, 1]], (0, 2), (2, 3), (3, 4), n0=5)
        scores = relevance(record)
        assert scores.raw_mass["other"] == pytest.approx(0.2, abs=1e-12)

    def test_permuting_within_a_span_is_invariant(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            record = random_record(rng, "answer")
            start, end = record.span_map.image_span
            if end - start < 2:
                continue
            permutation = rng.permutation(np.arange(start, end))
            rows = []
            for row in record.attention_rows:
                row = list(row)
                values = [row[i] for i in permutation]
                row[start:end] = values
                rows.append(tuple(row))
            permuted = GenerationRecord(
                task=record.task, output_tokens=record.output_tokens,
                token_logprobs=record.token_logprobs, attention_rows=tuple(rows),
                span_map=record.span_map, sampling=record.sampling,
            )
            base, perm = relevance(record), relevance(permuted)
            assert perm.r_image == pytest.approx(base.r_image, abs=1e-12)
            assert perm.r_question == pytest.approx(base.r_question, abs=1e-12)
            assert perm.r_context == pytest.approx(base.r_context, abs=1e-12)

    def test_empty_spans_error(self):
        record = record_with_rows([[0, 0, 1]], (0, 1), (1, 2), n0=3)
        with pytest.raises(EmptySpans):
            relevance(record)


class TestDifferences:
    def test_single_record(self):
        record = record_with_rows([[1, 1, 1, 1]], (0, 2), (2, 3), (3, 4))
        diffs = attention_differences([relevance(record)])
        assert diffs.mean_image_minus_question == pytest.approx(0.25, abs=1e-12)
        assert diffs.mean_image_minus_context == pytest.approx(0.25, abs=1e-12)

    def test_context_mean_over_context_bearing_records_only(self):
        no_context = record_with_rows([[3, 3, 2, 2, 0]], (0, 2), (2, 4), None, n0=5)
        with_context = record_with_rows([[5, 2, 3]], (0, 1), (1, 2), (2, 3))
        batch = [relevance(no_context), relevance(with_context)]
        assert batch[0].r_image == pytest.approx(0.6, abs=1e-12)
        assert batch[0].r_question == pytest.approx(0.4, abs=1e-12)
        assert batch[1].r_image == pytest.approx(0.5, abs=1e-12)
        assert batch[1].r_question == pytest.approx(0.2, abs=1e-12)
        assert batch[1].r_context == pytest.approx(0.3, abs=1e-12)
        diffs = attention_differences(batch)
        assert diffs.mean_image_minus_question == pytest.approx(0.25, abs=1e-12)
        assert diffs.mean_image_minus_context == pytest.approx(0.2, abs=1e-12)
        assert len(diffs.image_minus_context) == 1

    def test_no_context_anywhere_gives_none(self):
        record = record_with_rows([[1, 1, 1, 1]], (0, 2), (2, 4))
        diffs = attention_differences([relevance(record)])
        assert diffs.mean_image_minus_context is None

    def test_image_dominant_batch_has_positive_means(self):
        rng = np.random.default_rng(6)
        batch = []
        for _ in range(20):
            rows = [np.concatenate([rng.uniform(2, 3, 4), rng.uniform(0.1, 0.5, 4)])]
            batch.append(relevance(record_with_rows(rows, (0, 4), (4, 6), (6, 8))))
        assert all(s.r_image > s.r_question for s in batch)
        diffs = attention_differences(batch)
        assert diffs.mean_image_minus_question > 0
        assert diffs.mean_image_minus_context > 0

    def test_empty_batch(self):
        with pytest.raises(EmptyBatch):
            attention_differences([])
