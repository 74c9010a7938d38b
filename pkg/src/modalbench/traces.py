"""Serialized inference-trace format decoupling metrics from model runtimes.

Traces travel as UTF-8 JSON-Lines (``*.traces.jsonl``), one trace per line,
with a ``"trace_version": 1`` marker. A trace bundles the greedy generation
and the stochastic samples for one (sample, configuration, task) triple:
output tokens, per-token log-likelihoods, per-output-token attention rows
(already averaged over layers and heads by the producer), and the span map
locating image/question/context tokens in the prompt.

Attention is stored as one row per output token — the final attention row at
that decoding step, covering all preceding positions — rather than full
square matrices. Rows are accepted unnormalized; normalization happens in the
attribution stage.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Any, Iterable, Iterator

from .errors import ParseError, SchemaError

TRACE_VERSION = 1
TASKS = ("answer", "reasoning")

Span = tuple[int, int]


@dataclass(frozen=True)
class SpanMap:
    """Token-index ranges [start, end) locating each modality in the prompt.

    ``n0`` is the first-prompt length (image + question + context +
    description + instruction tokens). Reasoning traces append the answer
    tokens and a second prompt of length ``n1``, so their attended prefix is
    ``n0 + answer_length + n1``; ``answer_span`` starts at ``n0``.
    """

    image_span: Span
    question_span: Span
    n0: int
    context_span: Span | None = None
    description_span: Span | None = None
    answer_span: Span | None = None
    n1: int | None = None


@dataclass(frozen=True)
class Sampling:
    temperature: float
    index: int


@dataclass(frozen=True)
class GenerationRecord:
    """One generation: tokens, log-likelihoods, and attention rows.

    ``attention_rows[t]`` covers every position preceding output token ``t``,
    so it has length ``prefix_length + t``. Tokens carry their own leading
    whitespace; the full text is ``"".join(output_tokens)``.
    """

    task: str
    output_tokens: tuple[str, ...]
    token_logprobs: tuple[float, ...]
    attention_rows: tuple[tuple[float, ...], ...]
    span_map: SpanMap
    sampling: Sampling

    @property
    def output_text(self) -> str:
        return "".join(self.output_tokens)


@dataclass(frozen=True)
class InferenceTrace:
    """All generations for one (sample, configuration, task) triple."""

    sample_id: str
    config_id: str
    model_id: str
    greedy: GenerationRecord
    samples: tuple[GenerationRecord, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def task(self) -> str:
        return self.greedy.task

    @property
    def sample_texts(self) -> list[str]:
        return [record.output_text for record in self.samples]


def prefix_length(span_map: SpanMap, task: str) -> int:
    """Length of the attended prompt before the first output token."""
    if task == "answer":
        return span_map.n0
    answer_len = span_map.answer_span[1] - span_map.answer_span[0]
    return span_map.n0 + answer_len + (span_map.n1 or 0)


# --- validation ---------------------------------------------------------

_PREFIX_SPAN_FIELDS = ("image_span", "question_span", "context_span", "description_span")


def _check_span(name: str, span: Span, *, line: int | None) -> None:
    if (
        not isinstance(span, tuple)
        or len(span) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in span)
    ):
        raise SchemaError(name, "span must be a pair of integers", line=line)
    start, end = span
    if start < 0 or end < start:
        raise SchemaError(name, f"invalid range [{start}, {end})", line=line)


def validate_span_map(span_map: SpanMap, task: str, *, line: int | None = None) -> None:
    if not isinstance(span_map.n0, int) or span_map.n0 < 0:
        raise SchemaError("n0", "must be a nonnegative integer", line=line)

    present: list[tuple[str, Span]] = []
    for name in _PREFIX_SPAN_FIELDS:
        span = getattr(span_map, name)
        if span is None:
            continue
        _check_span(name, span, line=line)
        if span[1] > span_map.n0:
            raise SchemaError(name, f"span {span} exceeds prefix length n0={span_map.n0}",
                              line=line)
        present.append((name, span))

    ordered = sorted(present, key=lambda item: item[1])
    for (name_a, span_a), (name_b, span_b) in zip(ordered, ordered[1:]):
        if span_b[0] < span_a[1]:
            raise SchemaError(name_b, f"span {span_b} overlaps {name_a} {span_a}",
                              line=line)

    if span_map.question_span[1] <= span_map.question_span[0]:
        raise SchemaError("question_span", "must be nonempty", line=line)

    if task == "answer":
        if span_map.answer_span is not None:
            raise SchemaError("answer_span", "only reasoning traces carry an answer span",
                              line=line)
        if span_map.n1 is not None:
            raise SchemaError("n1", "only reasoning traces carry a second prompt",
                              line=line)
    else:
        if span_map.answer_span is None:
            raise SchemaError("answer_span", "reasoning traces require an answer span",
                              line=line)
        if span_map.n1 is None or not isinstance(span_map.n1, int) or span_map.n1 < 0:
            raise SchemaError("n1", "reasoning traces require a nonnegative n1", line=line)
        _check_span("answer_span", span_map.answer_span, line=line)
        if span_map.answer_span[0] != span_map.n0:
            raise SchemaError("answer_span",
                              f"must start at n0={span_map.n0}, got {span_map.answer_span}",
                              line=line)


def validate_record(record: GenerationRecord, *, line: int | None = None) -> None:
    if record.task not in TASKS:
        raise SchemaError("task", f"unknown task {record.task!r}", line=line)
    n_tokens = len(record.output_tokens)
    if len(record.token_logprobs) != n_tokens:
        raise SchemaError("token_logprobs",
                          f"{len(record.token_logprobs)} values for {n_tokens} tokens",
                          line=line)
    if len(record.attention_rows) != n_tokens:
        raise SchemaError("attention_rows",
                          f"{len(record.attention_rows)} rows for {n_tokens} tokens",
                          line=line)
    if not all(isinstance(tok, str) for tok in record.output_tokens):
        raise SchemaError("output_tokens", "tokens must be strings", line=line)
    for value in record.token_logprobs:
        if not isinstance(value, float) or math.isnan(value) or value > 0:
            raise SchemaError("token_logprobs",
                              f"log-likelihoods must be finite and <= 0, got {value!r}",
                              line=line)

    validate_span_map(record.span_map, record.task, line=line)
    prefix = prefix_length(record.span_map, record.task)
    for t, row in enumerate(record.attention_rows):
        if len(row) != prefix + t:
            raise SchemaError("attention_rows",
                              f"row {t} has length {len(row)}, expected {prefix + t}",
                              line=line)
        for value in row:
            if not isinstance(value, float) or math.isnan(value) or math.isinf(value) or value < 0:
                raise SchemaError("attention_rows",
                                  f"row {t} entry {value!r} must be finite and >= 0",
                                  line=line)

    if not isinstance(record.sampling.temperature, float) or record.sampling.temperature < 0:
        raise SchemaError("sampling", "temperature must be a float >= 0", line=line)
    if not isinstance(record.sampling.index, int) or isinstance(record.sampling.index, bool):
        raise SchemaError("sampling", "index must be an integer", line=line)


def validate_trace(trace: InferenceTrace, *, line: int | None = None) -> None:
    for name in ("sample_id", "config_id", "model_id"):
        value = getattr(trace, name)
        if not isinstance(value, str) or not value:
            raise SchemaError(name, "must be a nonempty string", line=line)
    validate_record(trace.greedy, line=line)
    for record in trace.samples:
        validate_record(record, line=line)
        if record.task != trace.greedy.task:
            raise SchemaError("samples",
                              f"sampled record task {record.task!r} differs from "
                              f"greedy task {trace.greedy.task!r}", line=line)
    if not isinstance(trace.metadata, dict):
        raise SchemaError("metadata", "must be an object", line=line)


# --- serialization ------------------------------------------------------


def _span_to_json(span: Span | None) -> list[int] | None:
    return None if span is None else [span[0], span[1]]


def span_map_to_dict(span_map: SpanMap) -> dict[str, Any]:
    out: dict[str, Any] = {
        "image_span": _span_to_json(span_map.image_span),
        "question_span": _span_to_json(span_map.question_span),
    }
    if span_map.context_span is not None:
        out["context_span"] = _span_to_json(span_map.context_span)
    if span_map.description_span is not None:
        out["description_span"] = _span_to_json(span_map.description_span)
    if span_map.answer_span is not None:
        out["answer_span"] = _span_to_json(span_map.answer_span)
    out["n0"] = span_map.n0
    if span_map.n1 is not None:
        out["n1"] = span_map.n1
    return out


def record_to_dict(record: GenerationRecord) -> dict[str, Any]:
    return {
        "task": record.task,
        "output_tokens": list(record.output_tokens),
        "token_logprobs": list(record.token_logprobs),
        "attention_rows": [list(row) for row in record.attention_rows],
        "span_map": span_map_to_dict(record.span_map),
        "sampling": {"temperature": record.sampling.temperature,
                     "index": record.sampling.index},
    }


def trace_to_dict(trace: InferenceTrace) -> dict[str, Any]:
    return {
        "trace_version": TRACE_VERSION,
        "sample_id": trace.sample_id,
        "config_id": trace.config_id,
        "model_id": trace.model_id,
        "greedy": record_to_dict(trace.greedy),
        "samples": [record_to_dict(r) for r in trace.samples],
        "metadata": trace.metadata,
    }


def _require(obj: dict, name: str, kind, *, line: int | None):
    if name not in obj:
        raise SchemaError(name, "missing field", line=line)
    value = obj[name]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(name, f"expected {kind.__name__}, got {type(value).__name__}",
                          line=line)
    return value


def _span_from_json(obj: dict, name: str, *, line: int | None,
                    required: bool) -> Span | None:
    if name not in obj or obj[name] is None:
        if required:
            raise SchemaError(name, "missing field", line=line)
        return None
    raw = obj[name]
    if (
        not isinstance(raw, list)
        or len(raw) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in raw)
    ):
        raise SchemaError(name, "span must be a [start, end] integer pair", line=line)
    return (raw[0], raw[1])


def span_map_from_dict(obj: Any, *, line: int | None = None) -> SpanMap:
    if not isinstance(obj, dict):
        raise SchemaError("span_map", "must be an object", line=line)
    n1 = obj.get("n1")
    if n1 is not None and (not isinstance(n1, int) or isinstance(n1, bool)):
        raise SchemaError("n1", "must be an integer", line=line)
    n0 = obj.get("n0")
    if not isinstance(n0, int) or isinstance(n0, bool):
        raise SchemaError("n0", "must be an integer", line=line)
    return SpanMap(
        image_span=_span_from_json(obj, "image_span", line=line, required=True),
        question_span=_span_from_json(obj, "question_span", line=line, required=True),
        context_span=_span_from_json(obj, "context_span", line=line, required=False),
        description_span=_span_from_json(obj, "description_span", line=line, required=False),
        answer_span=_span_from_json(obj, "answer_span", line=line, required=False),
        n0=n0,
        n1=n1,
    )


def _float_list(obj: dict, name: str, *, line: int | None) -> tuple[float, ...]:
    raw = _require(obj, name, list, line=line)
    values = []
    for v in raw:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(name, f"expected numbers, got {v!r}", line=line)
        values.append(float(v))
    return tuple(values)


def record_from_dict(obj: Any, *, line: int | None = None) -> GenerationRecord:
    if not isinstance(obj, dict):
        raise SchemaError("record", "must be an object", line=line)
    task = _require(obj, "task", str, line=line)
    tokens_raw = _require(obj, "output_tokens", list, line=line)
    if not all(isinstance(t, str) for t in tokens_raw):
        raise SchemaError("output_tokens", "tokens must be strings", line=line)
    rows_raw = _require(obj, "attention_rows", list, line=line)
    rows = []
    for t, row in enumerate(rows_raw):
        if not isinstance(row, list):
            raise SchemaError("attention_rows", f"row {t} must be a list", line=line)
        values = []
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise SchemaError("attention_rows", f"row {t} entry {v!r} must be a number",
                                  line=line)
            values.append(float(v))
        rows.append(tuple(values))
    sampling_raw = _require(obj, "sampling", dict, line=line)
    temperature = sampling_raw.get("temperature")
    if isinstance(temperature, int) and not isinstance(temperature, bool):
        temperature = float(temperature)
    index = sampling_raw.get("index")
    if not isinstance(temperature, float):
        raise SchemaError("sampling", "temperature must be a number", line=line)
    if not isinstance(index, int) or isinstance(index, bool):
        raise SchemaError("sampling", "index must be an integer", line=line)

    record = GenerationRecord(
        task=task,
        output_tokens=tuple(tokens_raw),
        token_logprobs=_float_list(obj, "token_logprobs", line=line),
        attention_rows=tuple(rows),
        span_map=span_map_from_dict(obj.get("span_map"), line=line),
        sampling=Sampling(temperature=temperature, index=index),
    )
    validate_record(record, line=line)
    return record


def trace_from_dict(obj: Any, *, line: int | None = None) -> InferenceTrace:
    if not isinstance(obj, dict):
        raise SchemaError("trace", "each line must be a JSON object", line=line)
    version = obj.get("trace_version")
    if version != TRACE_VERSION:
        raise SchemaError("trace_version", f"expected {TRACE_VERSION}, got {version!r}",
                          line=line)
    samples_raw = _require(obj, "samples", list, line=line)
    metadata = obj.get("metadata", {})
    trace = InferenceTrace(
        sample_id=_require(obj, "sample_id", str, line=line),
        config_id=_require(obj, "config_id", str, line=line),
        model_id=_require(obj, "model_id", str, line=line),
        greedy=record_from_dict(obj.get("greedy"), line=line),
        samples=tuple(record_from_dict(s, line=line) for s in samples_raw),
        metadata=metadata,
    )
    validate_trace(trace, line=line)
    return trace


def parse_trace_stream(source: IO[bytes] | Iterable[bytes]) -> Iterator[InferenceTrace]:
    """Lazily parse a JSON-Lines byte stream of traces.

    Yields validated traces one at a time; memory stays bounded by the
    largest single trace. Blank lines are skipped. Raises
    :class:`ParseError` with the line number on malformed JSON and
    :class:`SchemaError` naming the offending field.
    """
    for line_no, raw in enumerate(source, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ParseError(f"invalid JSON: {exc}", line=line_no) from exc
        yield trace_from_dict(obj, line=line_no)


def trace_to_json_line(trace: InferenceTrace) -> bytes:
    """Canonical single-line serialization (stable byte-for-byte)."""
    return json.dumps(trace_to_dict(trace), separators=(",", ":"),
                      ensure_ascii=True, sort_keys=False).encode("utf-8") + b"\n"


def write_trace(trace: InferenceTrace, sink: IO[bytes]) -> None:
    """Validate and append one trace to a JSON-Lines sink."""
    validate_trace(trace)
    sink.write(trace_to_json_line(trace))


def read_trace_file(path) -> list[InferenceTrace]:
    with open(path, "rb") as handle:
        return list(parse_trace_stream(handle))


def write_trace_file(path, traces: Iterable[InferenceTrace]) -> None:
    with open(path, "wb") as handle:
        for trace in traces:
            write_trace(trace, handle)
