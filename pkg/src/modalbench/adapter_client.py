"""HTTP clients for a model-adapter sidecar: generation and entailment.

The sidecar contract: ``POST /generate`` takes the assembled input (image as
base64 PNG) plus sampling parameters and returns one trace in exactly the
``.traces.jsonl`` line schema; ``POST /entail`` labels a premise/hypothesis
pair. Entailment calls are cached so clustering stays deterministic within a
run.
"""

from __future__ import annotations

import base64
import threading

import httpx

from .dataset import AssembledInput
from .errors import AdapterError, OracleFailure, SchemaError
from .traces import InferenceTrace, trace_from_dict


def assembled_to_wire(assembled: AssembledInput) -> dict:
    image_b64 = None
    if assembled.image_bytes is not None:
        image_b64 = base64.b64encode(assembled.image_bytes).decode("ascii")
    return {
        "sample_id": assembled.sample_id,
        "config_id": assembled.config_id,
        "image_b64": image_b64,
        "question_text": assembled.question_text,
        "context_text": assembled.context_text,
        "description_text": assembled.description_text,
        "answer_prompt": assembled.answer_prompt,
        "reasoning_prompt": assembled.reasoning_prompt,
    }


def assembled_from_wire(payload: dict) -> AssembledInput:
    image_b64 = payload.get("image_b64")
    return AssembledInput(
        sample_id=payload["sample_id"],
        config_id=payload["config_id"],
        image_bytes=base64.b64decode(image_b64) if image_b64 else None,
        question_text=payload["question_text"],
        context_text=payload.get("context_text"),
        description_text=payload.get("description_text"),
        answer_prompt=payload["answer_prompt"],
        reasoning_prompt=payload["reasoning_prompt"],
    )


class HttpAdapter:
    """Generation client for a remote adapter sidecar."""

    def __init__(self, base_url: str, model_id: str = "", timeout: float = 300.0):
        self.model_id = model_id or base_url
        self._base_url = base_url.rstrip("/")
        self._client = httpx.Client(timeout=timeout)

    def generate(self, assembled: AssembledInput, task: str, n_samples: int,
                 temperature: float, seed: int) -> InferenceTrace:
        body = {
            "input": assembled_to_wire(assembled),
            "task": task,
            "n_samples": n_samples,
            "temperature": temperature,
            "seed": seed,
            "need_attention": True,
            "need_logprobs": True,
        }
        try:
            response = self._client.post(f"{self._base_url}/generate", json=body)
            response.raise_for_status()
            payload = response.json()
        except httpx.HTTPError as exc:
            raise AdapterError(f"adapter request failed: {exc}",
                               sample_id=assembled.sample_id,
                               config_id=assembled.config_id) from exc
        try:
            return trace_from_dict(payload)
        except SchemaError as exc:
            raise AdapterError(f"adapter returned an invalid trace: {exc}",
                               sample_id=assembled.sample_id,
                               config_id=assembled.config_id) from exc


class RemoteEntailmentOracle:
    """Entailment oracle backed by the sidecar's /entail endpoint.

    Caches every (premise, hypothesis) judgment: backends must behave
    deterministically within a run.
    """

    def __init__(self, base_url: str, timeout: float = 60.0):
        self._base_url = base_url.rstrip("/")
        self._client = httpx.Client(timeout=timeout)
        self._cache: dict[tuple[str, str], str] = {}
        self._lock = threading.Lock()

    def judge(self, premise: str, hypothesis: str) -> str:
        key = (premise, hypothesis)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        try:
            response = self._client.post(
                f"{self._base_url}/entail",
                json={"premise": premise, "hypothesis": hypothesis},
            )
            response.raise_for_status()
            label = response.json().get("label")
        except (httpx.HTTPError, ValueError) as exc:
            raise OracleFailure(f"entailment endpoint failed: {exc}") from exc
        if label not in ("entails", "neutral", "contradicts"):
            raise OracleFailure(f"entailment endpoint returned {label!r}")
        with self._lock:
            self._cache[key] = label
        return label
