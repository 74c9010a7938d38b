"""Answer extraction, accuracy/confusion metrics, judge scoring, correlation.

Generated answers rarely arrive as a bare Yes/No, so :func:`parse_answer`
scans for a standalone verdict token (first sentence first, then the whole
text). Unparseable generations count as wrong but are tracked separately in
the confusion matrix. Reasoning quality has no ground truth; an external
judge model rates it 0..10 under a fixed rubric prompt.
"""

from __future__ import annotations

import base64
import json
import math
import re
import threading
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import httpx

from .errors import (
    DegenerateVariance,
    JudgeUnavailable,
    LengthMismatch,
    MalformedJudgeReply,
)

VERDICT_YES = "yes"
VERDICT_NO = "no"
VERDICT_UNPARSEABLE = "unparseable"

_VERDICT_TOKEN = re.compile(r"\b(yes|no)\b", re.IGNORECASE)
_SENTENCE_END = re.compile(r"[.!?\n]")

# Rubric sent verbatim to the judge, recorded in run metadata.
JUDGE_PROMPT = (
    "Rate the explanation's quality from 0 to 10. Give 10 for detailed, "
    "well-argued, and correct explanations. Give 0 for a poorly reasoned, "
    "wrong, or single-word explanation based on the question and image. "
    "Don't rate too harshly, use the full scale and output only the final score"
)

JUDGE_ATTEMPTS = 3


@dataclass(frozen=True)
class ParsedAnswer:
    verdict: str  # yes | no | unparseable
    matched_text: str
    source: str


def parse_answer(text: str) -> ParsedAnswer:
    """Extract a Yes/No verdict from a generation.

    Case-insensitive scan of the first sentence for a standalone "yes" or
    "no" token; the first match wins and negation nearby does not flip it.
    Falls back to the full text, then to unparseable. Total and
    deterministic; unparseable is a value, not an error.
    """
    boundary = _SENTENCE_END.search(text)
    first_sentence = text if boundary is None else text[: boundary.end()]
    match = _VERDICT_TOKEN.search(first_sentence) or _VERDICT_TOKEN.search(text)
    if match is None:
        return ParsedAnswer(verdict=VERDICT_UNPARSEABLE, matched_text="", source=text)
    return ParsedAnswer(
        verdict=match.group(1).lower(), matched_text=match.group(0), source=text
    )


@dataclass(frozen=True)
class ConfusionMatrix:
    """Yes/No confusion counts; unparseable answers are tracked separately."""

    tp: int
    tn: int
    fp: int
    fn: int
    n_unparseable: int

    @property
    def n(self) -> int:
        return self.tp + self.tn + self.fp + self.fn + self.n_unparseable

    @property
    def accuracy(self) -> float:
        # Unparseable answers stay in the denominator: they are wrong answers.
        return (self.tp + self.tn) / self.n if self.n else 0.0

    @property
    def tpr(self) -> float | None:
        positives = self.tp + self.fn
        return self.tp / positives if positives else None

    @property
    def tnr(self) -> float | None:
        negatives = self.tn + self.fp
        return self.tn / negatives if negatives else None


def score_answers(parsed: Sequence[ParsedAnswer], truths: Sequence[bool]) -> ConfusionMatrix:
    """Score parsed verdicts against ground truth (True = Yes)."""
    if len(parsed) != len(truths):
        raise LengthMismatch(
            f"{len(parsed)} parsed answers vs {len(truths)} ground truths"
        )
    tp = tn = fp = fn = unparseable = 0
    for answer, truth in zip(parsed, truths):
        if answer.verdict == VERDICT_UNPARSEABLE:
            unparseable += 1
        elif answer.verdict == VERDICT_YES:
            tp, fp = (tp + 1, fp) if truth else (tp, fp + 1)
        else:
            fn, tn = (fn + 1, tn) if truth else (fn, tn + 1)
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn, n_unparseable=unparseable)


@dataclass(frozen=True)
class ReasoningItem:
    """Everything the judge sees besides the rubric."""

    question: str
    image: bytes | None
    answer: str
    reasoning: str


@dataclass(frozen=True)
class JudgeScore:
    score: int
    raw_response: str
    judge_model: str


class JudgeClient(Protocol):
    """External reasoning judge. ``complete`` returns the raw reply text."""

    model_id: str

    def complete(self, prompt: str, item: ReasoningItem,
                 idempotency_key: str | None = None) -> str: ...


_FIRST_INTEGER = re.compile(r"-?\d+")


def judge_reasoning(item: ReasoningItem, client: JudgeClient,
                    idempotency_key: str | None = None) -> JudgeScore:
    """Ask the judge to rate one reasoning 0..10.

    The first integer in the reply is the score; out-of-range integers are
    malformed, never clamped. Malformed replies are retried up to
    ``JUDGE_ATTEMPTS`` times in total before raising.
    """
    if not item.reasoning.strip():
        raise ValueError("cannot judge empty reasoning")
    last_reply = ""
    for _ in range(JUDGE_ATTEMPTS):
        reply = client.complete(JUDGE_PROMPT, item, idempotency_key)
        match = _FIRST_INTEGER.search(reply)
        if match is not None:
            value = int(match.group(0))
            if 0 <= value <= 10:
                return JudgeScore(score=value, raw_response=reply,
                                  judge_model=client.model_id)
        last_reply = reply
    raise MalformedJudgeReply(
        f"no usable 0..10 score after {JUDGE_ATTEMPTS} attempts; "
        f"last reply: {last_reply!r}"
    )


class MockJudgeClient:
    """Scripted judge for tests: a fixed reply, a sequence, or a callable."""

    def __init__(self, script: str | Sequence[str] | Callable[[ReasoningItem], str],
                 model_id: str = "mock-judge"):
        self.model_id = model_id
        self.calls: list[ReasoningItem] = []
        self._script = script
        self._cursor = 0

    def complete(self, prompt: str, item: ReasoningItem,
                 idempotency_key: str | None = None) -> str:
        self.calls.append(item)
        if callable(self._script):
            return self._script(item)
        if isinstance(self._script, str):
            return self._script
        reply = self._script[min(self._cursor, len(self._script) - 1)]
        self._cursor += 1
        return reply


class HttpJudgeClient:
    """OpenAI-compatible chat client with a single image attachment.

    Requests and responses are appended to ``log_path`` (JSON-Lines) with the
    API key redacted. Temperature is pinned to 0.
    """

    def __init__(self, base_url: str, api_key: str = "", model_id: str = "judge",
                 log_path=None, timeout: float = 60.0):
        self.model_id = model_id
        self._base_url = base_url.rstrip("/")
        self._api_key = api_key
        self._log_path = log_path
        self._client = httpx.Client(timeout=timeout)
        self._log_lock = threading.Lock()

    def _log(self, payload: dict) -> None:
        if self._log_path is None:
            return
        with self._log_lock, open(self._log_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(payload, sort_keys=True) + "\n")

    def complete(self, prompt: str, item: ReasoningItem,
                 idempotency_key: str | None = None) -> str:
        content: list[dict] = [{
            "type": "text",
            "text": (
                f"{prompt}\n\nQuestion: {item.question}\n"
                f"Answer: {item.answer}\nExplanation: {item.reasoning}"
            ),
        }]
        if item.image is not None:
            encoded = base64.b64encode(item.image).decode("ascii")
            content.append({
                "type": "image_url",
                "image_url": {"url": f"data:image/png;base64,{encoded}"},
            })
        body = {
            "model": self.model_id,
            "temperature": 0,
            "messages": [{"role": "user", "content": content}],
        }
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        if idempotency_key:
            headers["Idempotency-Key"] = idempotency_key
        try:
            response = self._client.post(
                f"{self._base_url}/chat/completions", json=body, headers=headers
            )
            response.raise_for_status()
            parsed = response.json()
            reply = parsed["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            self._log({"request": {"url": self._base_url, "idempotency_key": idempotency_key},
                       "error": str(exc)})
            raise JudgeUnavailable(f"judge endpoint failed: {exc}") from exc
        self._log({
            "request": {"url": self._base_url, "model": self.model_id,
                        "idempotency_key": idempotency_key,
                        "api_key": "<redacted>" if self._api_key else "",
                        "question": item.question},
            "response": reply,
        })
        return reply


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation coefficient of two equal-length series."""
    if len(x) != len(y):
        raise LengthMismatch(f"{len(x)} vs {len(y)} values")
    if len(x) < 2:
        raise ValueError("correlation needs at least two points")
    mean_x = sum(x) / len(x)
    mean_y = sum(y) / len(y)
    dx = [v - mean_x for v in x]
    dy = [v - mean_y for v in y]
    var_x = sum(v * v for v in dx)
    var_y = sum(v * v for v in dy)
    if var_x == 0.0 or var_y == 0.0:
        raise DegenerateVariance("a constant series has no correlation")
    return sum(a * b for a, b in zip(dx, dy)) / math.sqrt(var_x * var_y)
