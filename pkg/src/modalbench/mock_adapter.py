"""Scenario-driven in-process adapter producing fully deterministic traces.

The mock stands in for a model runtime so the whole pipeline — expansion,
trace persistence, metrics, reports, the interactive service — runs without
any GPU. A scenario file scripts, per (sample, configuration), the greedy and
sampled output texts, token log-likelihoods, attention shares per modality,
and optional judge replies. Inputs without a scenario entry fall back to
content-hashed behavior so edited questions/contexts still produce varied,
reproducible outputs.
"""

from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .dataset import AssembledInput
from .errors import AdapterError, ParseError
from .traces import GenerationRecord, InferenceTrace, Sampling, SpanMap, prefix_length

ADAPTER_VERSION = "mock-1"
ATTENTION_AGGREGATION = "mean_layers_heads_v1"

DEFAULT_ATTENTION_SHARES = {"image": 0.55, "question": 0.30, "context": 0.15}
DEFAULT_TOKEN_LOGPROB = -0.35


class AdapterClient(Protocol):
    """Anything that turns an assembled input into an inference trace."""

    model_id: str

    def generate(self, assembled: AssembledInput, task: str, n_samples: int,
                 temperature: float, seed: int) -> InferenceTrace: ...


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization where tokens keep their leading space.

    Guarantees ``"".join(tokenize(text)) == text`` for nonempty text.
    """
    if not text:
        return []
    words = text.split(" ")
    tokens = [words[0]]
    tokens.extend(" " + w for w in words[1:])
    return [t for t in tokens if t] or [text]


def stable_seed(*parts) -> int:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % (2**63)


@dataclass(frozen=True)
class MockGeneration:
    greedy: str
    samples: tuple[str, ...]
    sample_token_logprobs: tuple[float, ...] | None = None


@dataclass(frozen=True)
class MockEntry:
    answer: MockGeneration
    reasoning: MockGeneration
    attention: dict[str, float] | None = None
    token_logprob: float | None = None


@dataclass
class MockScenario:
    """Scripted behavior for the mock adapter, loadable from JSON."""

    model_id: str = "mock-vlm"
    image_tokens: int = 8
    attention: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_ATTENTION_SHARES))
    token_logprob: float = DEFAULT_TOKEN_LOGPROB
    entries: dict[str, MockEntry] = field(default_factory=dict)
    judge_default_reply: str = "8"
    judge_replies: dict[str, str] = field(default_factory=dict)

    @staticmethod
    def key(sample_id: str, config_id: str) -> str:
        return f"{sample_id}|{config_id}"

    def entry_for(self, sample_id: str, config_id: str) -> MockEntry | None:
        return self.entries.get(self.key(sample_id, config_id))

    def judge_reply(self, sample_id: str, config_id: str) -> str:
        return self.judge_replies.get(self.key(sample_id, config_id),
                                      self.judge_default_reply)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "model_id": self.model_id,
            "image_tokens": self.image_tokens,
            "attention": self.attention,
            "token_logprob": self.token_logprob,
            "judge": {"default_reply": self.judge_default_reply,
                      "replies": self.judge_replies},
            "entries": {
                key: {
                    "answer": _generation_to_dict(entry.answer),
                    "reasoning": _generation_to_dict(entry.reasoning),
                    **({"attention": entry.attention} if entry.attention else {}),
                    **({"token_logprob": entry.token_logprob}
                       if entry.token_logprob is not None else {}),
                }
                for key, entry in self.entries.items()
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "MockScenario":
        if not isinstance(payload, dict) or payload.get("version") != 1:
            raise ParseError("mock scenario must be an object with version 1")
        judge = payload.get("judge", {})
        entries = {}
        for key, raw in payload.get("entries", {}).items():
            entries[key] = MockEntry(
                answer=_generation_from_dict(raw.get("answer"), key),
                reasoning=_generation_from_dict(raw.get("reasoning"), key),
                attention=raw.get("attention"),
                token_logprob=raw.get("token_logprob"),
            )
        return cls(
            model_id=payload.get("model_id", "mock-vlm"),
            image_tokens=payload.get("image_tokens", 8),
            attention=payload.get("attention", dict(DEFAULT_ATTENTION_SHARES)),
            token_logprob=payload.get("token_logprob", DEFAULT_TOKEN_LOGPROB),
            entries=entries,
            judge_default_reply=judge.get("default_reply", "8"),
            judge_replies=judge.get("replies", {}),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "MockScenario":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot load mock scenario {path}: {exc}") from exc

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True),
                              encoding="utf-8")


def _generation_to_dict(gen: MockGeneration) -> dict:
    out = {"greedy": gen.greedy, "samples": list(gen.samples)}
    if gen.sample_token_logprobs is not None:
        out["sample_token_logprobs"] = list(gen.sample_token_logprobs)
    return out


def _generation_from_dict(raw, key: str) -> MockGeneration:
    if not isinstance(raw, dict) or not raw.get("greedy") or not raw.get("samples"):
        raise ParseError(f"scenario entry {key!r} needs greedy text and samples")
    logprobs = raw.get("sample_token_logprobs")
    return MockGeneration(
        greedy=raw["greedy"],
        samples=tuple(raw["samples"]),
        sample_token_logprobs=tuple(logprobs) if logprobs is not None else None,
    )


class MockAdapter:
    """Deterministic adapter backed by a :class:`MockScenario`."""

    def __init__(self, scenario: MockScenario):
        self.scenario = scenario
        self.model_id = scenario.model_id

    # -- scripted/fallback text selection ---------------------------------

    def _generation_script(self, assembled: AssembledInput, task: str) -> MockGeneration:
        entry = self.scenario.entry_for(assembled.sample_id, assembled.config_id)
        if entry is not None:
            return entry.answer if task == "answer" else entry.reasoning
        return self._fallback_generation(assembled, task)

    def _fallback_generation(self, assembled: AssembledInput, task: str) -> MockGeneration:
        # Content-hashed behavior for inputs the scenario does not script
        # (edited questions/contexts in the interactive service).
        content = "|".join([
            assembled.question_text,
            assembled.context_text or "",
            assembled.description_text or "",
            str(zlib.crc32(assembled.image_bytes or b"")),
        ])
        h = stable_seed("fallback", task, content)
        verdict = "Yes." if h % 2 == 0 else "No."
        other = "No." if verdict == "Yes." else "Yes."
        spread = h % 4  # 0..3 dissenting samples out of 10
        if task == "answer":
            samples = tuple(other if i < spread else verdict for i in range(10))
            return MockGeneration(greedy=verdict, samples=samples)
        text = f"{verdict[:-1]}, judging from the visible evidence in the image."
        alt = f"{other[:-1]}, the picture suggests otherwise."
        samples = tuple(alt if i < spread else text for i in range(10))
        return MockGeneration(greedy=text, samples=samples)

    # -- trace assembly ----------------------------------------------------

    def _span_layout(self, assembled: AssembledInput, task: str,
                     answer_text: str) -> SpanMap:
        image_len = self.scenario.image_tokens if assembled.image_bytes is not None else 0
        question_len = len(tokenize(assembled.question_text))
        context_len = len(tokenize(assembled.context_text or ""))
        description_len = len(tokenize(assembled.description_text or ""))
        instruction_len = len(tokenize(assembled.answer_prompt))

        cursor = image_len
        image_span = (0, image_len)
        question_span = (cursor, cursor + question_len)
        cursor += question_len
        context_span = None
        if assembled.context_text is not None:
            context_span = (cursor, cursor + context_len)
            cursor += context_len
        description_span = None
        if assembled.description_text is not None:
            description_span = (cursor, cursor + description_len)
            cursor += description_len
        n0 = cursor + instruction_len

        if task == "answer":
            return SpanMap(image_span=image_span, question_span=question_span,
                           context_span=context_span,
                           description_span=description_span, n0=n0)
        answer_len = len(tokenize(answer_text))
        return SpanMap(
            image_span=image_span,
            question_span=question_span,
            context_span=context_span,
            description_span=description_span,
            n0=n0,
            answer_span=(n0, n0 + answer_len),
            n1=len(tokenize(assembled.reasoning_prompt)),
        )

    def _attention_shares(self, assembled: AssembledInput) -> dict[str, float]:
        entry = self.scenario.entry_for(assembled.sample_id, assembled.config_id)
        if entry is not None and entry.attention:
            return entry.attention
        return self.scenario.attention

    def _token_logprob(self, assembled: AssembledInput) -> float:
        entry = self.scenario.entry_for(assembled.sample_id, assembled.config_id)
        if entry is not None and entry.token_logprob is not None:
            return entry.token_logprob
        return self.scenario.token_logprob

    def _record(self, assembled: AssembledInput, task: str, text: str,
                token_logprob: float, span_map: SpanMap, temperature: float,
                index: int, seed: int) -> GenerationRecord:
        tokens = tokenize(text)
        if not tokens:
            raise AdapterError("scenario produced empty generation",
                               sample_id=assembled.sample_id,
                               config_id=assembled.config_id)
        if token_logprob > 0:
            raise AdapterError(f"scenario token_logprob must be <= 0, got {token_logprob}",
                               sample_id=assembled.sample_id,
                               config_id=assembled.config_id)
        shares = self._attention_shares(assembled)
        rng = np.random.default_rng(seed)
        prefix = prefix_length(span_map, task)

        span_weights: list[tuple[tuple[int, int], float]] = []
        for name, span in (("image", span_map.image_span),
                           ("question", span_map.question_span),
                           ("context", span_map.context_span)):
            if span is not None and span[1] > span[0]:
                share = float(shares.get(name, 0.0))
                span_weights.append((span, share / (span[1] - span[0])))

        rows = []
        for t in range(len(tokens)):
            row = rng.uniform(0.002, 0.01, size=prefix + t)
            for (start, end), per_token in span_weights:
                if per_token > 0:
                    row[start:end] = per_token * rng.uniform(0.7, 1.3, size=end - start)
            rows.append(tuple(float(v) for v in row))

        return GenerationRecord(
            task=task,
            output_tokens=tuple(tokens),
            token_logprobs=tuple(float(token_logprob) for _ in tokens),
            attention_rows=tuple(rows),
            span_map=span_map,
            sampling=Sampling(temperature=float(temperature), index=index),
        )

    def generate(self, assembled: AssembledInput, task: str, n_samples: int,
                 temperature: float, seed: int) -> InferenceTrace:
        """Build the trace for one (sample, configuration, task) request."""
        if task not in ("answer", "reasoning"):
            raise AdapterError(f"unknown task {task!r}",
                               sample_id=assembled.sample_id,
                               config_id=assembled.config_id)
        script = self._generation_script(assembled, task)
        answer_script = self._generation_script(assembled, "answer")
        span_map = self._span_layout(assembled, task, answer_script.greedy)
        logprob = self._token_logprob(assembled)

        greedy = self._record(
            assembled, task, script.greedy, logprob, span_map, 0.0, 0,
            stable_seed(seed, assembled.sample_id, assembled.config_id, task, "greedy"),
        )
        samples = []
        for i in range(n_samples):
            text = script.samples[i % len(script.samples)]
            sample_logprob = logprob
            if script.sample_token_logprobs is not None:
                sample_logprob = script.sample_token_logprobs[
                    i % len(script.sample_token_logprobs)]
            samples.append(self._record(
                assembled, task, text, sample_logprob, span_map, temperature, i,
                stable_seed(seed, assembled.sample_id, assembled.config_id, task, i),
            ))

        return InferenceTrace(
            sample_id=assembled.sample_id,
            config_id=assembled.config_id,
            model_id=self.model_id,
            greedy=greedy,
            samples=tuple(samples),
            metadata={
                "adapter": "mock",
                "adapter_version": ADAPTER_VERSION,
                "attention_aggregation": ATTENTION_AGGREGATION,
                "question": assembled.question_text,
                "context": assembled.context_text,
                "description": assembled.description_text,
                "answer_prompt": assembled.answer_prompt,
                "reasoning_prompt": assembled.reasoning_prompt,
                "temperature": float(temperature),
                "n_samples": n_samples,
                "seed": seed,
            },
        )
