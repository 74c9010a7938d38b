"""HTTP sidecar: /generate emits engine-conformant traces, /entail labels
premise/hypothesis pairs, /judge proxies a configured judge endpoint.

The /generate response body is exactly one trace in the engine's
``.traces.jsonl`` line schema; that wire format is the whole contract between
this sidecar and the metric engine.
"""

from __future__ import annotations

import base64
import logging
import os
import threading
from dataclasses import dataclass

import httpx
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .nli import build_backend
from .runtime import TinyRuntime

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenerationInput:
    sample_id: str
    config_id: str
    image_bytes: bytes | None
    question_text: str
    context_text: str | None
    description_text: str | None
    answer_prompt: str
    reasoning_prompt: str


class WireInput(BaseModel):
    sample_id: str
    config_id: str
    image_b64: str | None = None
    question_text: str
    context_text: str | None = None
    description_text: str | None = None
    answer_prompt: str = ""
    reasoning_prompt: str = ""


class GenerateRequest(BaseModel):
    input: WireInput
    task: str
    n_samples: int = Field(default=10, ge=0)
    temperature: float = Field(default=0.9, ge=0.0)
    seed: int = 0
    need_attention: bool = True
    need_logprobs: bool = True


class EntailRequest(BaseModel):
    premise: str
    hypothesis: str


class JudgeProxyRequest(BaseModel):
    body: dict


def create_app(runtime=None, nli_backend=None,
               judge_url: str | None = None) -> FastAPI:
    runtime = runtime or TinyRuntime()
    nli_backend = nli_backend or build_backend(os.environ.get("NLI_CHECKPOINT"))
    judge_url = judge_url or os.environ.get("JUDGE_URL", "")
    # One model instance: requests are serialized like a single-GPU queue.
    generate_lock = threading.Lock()

    app = FastAPI(title="modalbench adapter")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/health")
    def health():
        return {
            "model_id": runtime.model_id,
            "quantization": runtime.quantization,
            "nli_backend": nli_backend.backend_id,
        }

    @app.post("/generate")
    def generate(request: GenerateRequest):
        if request.task not in ("answer", "reasoning"):
            raise HTTPException(status_code=400,
                                detail=f"unknown task {request.task!r}")
        wire = request.input
        image_bytes = None
        if wire.image_b64:
            try:
                image_bytes = base64.b64decode(wire.image_b64)
            except ValueError as exc:
                raise HTTPException(status_code=400,
                                    detail="image_b64 is not valid base64") from exc
        payload = GenerationInput(
            sample_id=wire.sample_id,
            config_id=wire.config_id,
            image_bytes=image_bytes,
            question_text=wire.question_text,
            context_text=wire.context_text,
            description_text=wire.description_text,
            answer_prompt=wire.answer_prompt,
            reasoning_prompt=wire.reasoning_prompt,
        )
        try:
            with generate_lock:
                return runtime.generate_trace(payload, request.task,
                                              request.n_samples,
                                              request.temperature, request.seed)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except Exception as exc:
            logger.exception("generation failed")
            raise HTTPException(status_code=500, detail={
                "cause": type(exc).__name__, "message": str(exc),
                "sample_id": wire.sample_id, "config_id": wire.config_id,
            }) from exc

    @app.post("/entail")
    def entail(request: EntailRequest):
        try:
            label = nli_backend.judge(request.premise, request.hypothesis)
        except Exception as exc:
            logger.exception("entailment failed")
            raise HTTPException(status_code=500, detail={
                "cause": type(exc).__name__, "message": str(exc)}) from exc
        return {"label": label, "backend": nli_backend.backend_id}

    @app.post("/judge")
    def judge_proxy(request: JudgeProxyRequest):
        if not judge_url:
            raise HTTPException(status_code=502, detail="no judge endpoint configured")
        headers = {}
        api_key = os.environ.get("JUDGE_API_KEY", "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        try:
            response = httpx.post(f"{judge_url.rstrip('/')}/chat/completions",
                                  json=request.body, headers=headers, timeout=60.0)
            response.raise_for_status()
            return response.json()
        except httpx.HTTPError as exc:
            raise HTTPException(status_code=502,
                                detail=f"judge endpoint failed: {exc}") from exc

    return app
