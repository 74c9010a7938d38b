"""HTTP service backing the interactive workbench.

Serves the dataset, evaluates one (possibly edited) input at a time through
the configured adapter, and exposes completed run reports plus dataset-wide
averages for hover context. Every number returned by ``POST /evaluate`` comes
from the same metric code as the batch pipeline, so an unmodified preset
evaluates to exactly the batch numbers for that (sample, configuration).

Schema violations return 400; adapter failures pass through as 502.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, replace
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .adapter_client import HttpAdapter
from .dataset import (
    CONFIG_IDS,
    NOISE_SIGMA,
    Sample,
    apply_gaussian_noise,
    configuration_for,
    expand,
    load_manifest,
)
from .errors import AdapterError, ModalBenchError
from .mock_adapter import AdapterClient, MockAdapter, MockScenario, stable_seed
from .uncertainty import ExactMatchOracle, uncertainty_for_trace
from .attention import relevance


@dataclass
class ServiceConfig:
    dataset_path: str
    runs_root: str
    adapter_endpoint: str = "mock"
    mock_scenario_path: str | None = None
    n_samples: int = 10
    temperature: float = 0.9
    estimator: str = "discrete"
    baseline_variant: str = "black"
    seed: int = 0


class NoiseSpec(BaseModel):
    sigma: float = Field(ge=0.0)
    seed: int | None = None


class EvaluateOverrides(BaseModel):
    image_b64: str | None = None
    question: str | None = None
    context: str | None = None
    description: str | None = None


class EvaluateRequest(BaseModel):
    sample_id: str
    config_id: str
    task: str = "answer"
    overrides: EvaluateOverrides | None = None
    noise: NoiseSpec | None = None
    n_samples: int | None = Field(default=None, ge=1)
    temperature: float | None = Field(default=None, gt=0.0)
    estimator: str | None = None
    prompt_style: str = "standard"


def _sample_summary(sample: Sample) -> dict:
    return {
        "id": sample.id,
        "question": sample.question,
        "ground_truth": sample.ground_truth,
        "tags": list(sample.tags),
    }


def _sample_detail(sample: Sample) -> dict:
    return {
        **_sample_summary(sample),
        "complementary_context": sample.complementary_context,
        "contradictory_context": sample.contradictory_context,
        "image_b64": base64.b64encode(sample.image.png_bytes()).decode("ascii"),
        "annotated_image_b64": base64.b64encode(
            sample.annotated_image.png_bytes()).decode("ascii"),
    }


def create_app(config: ServiceConfig,
               adapter: AdapterClient | None = None) -> FastAPI:
    samples = {s.id: s for s in load_manifest(config.dataset_path)}
    if adapter is None:
        if config.adapter_endpoint == "mock":
            adapter = MockAdapter(MockScenario.from_file(config.mock_scenario_path))
        else:
            adapter = HttpAdapter(config.adapter_endpoint)
    oracle = ExactMatchOracle()
    runs_root = Path(config.runs_root)

    app = FastAPI(title="modalbench service")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/samples")
    def list_samples():
        return {"samples": [_sample_summary(s) for s in samples.values()]}

    @app.get("/samples/{sample_id}")
    def get_sample(sample_id: str):
        sample = samples.get(sample_id)
        if sample is None:
            raise HTTPException(status_code=404, detail=f"unknown sample {sample_id!r}")
        return _sample_detail(sample)

    @app.post("/evaluate")
    def evaluate(request: EvaluateRequest):
        sample = samples.get(request.sample_id)
        if sample is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown sample {request.sample_id!r}")
        if request.config_id not in CONFIG_IDS:
            raise HTTPException(status_code=400,
                                detail=f"unknown config {request.config_id!r}")
        if request.task not in ("answer", "reasoning"):
            raise HTTPException(status_code=400,
                                detail=f"unknown task {request.task!r}")
        estimator = request.estimator or config.estimator
        if estimator not in ("discrete", "likelihood"):
            raise HTTPException(status_code=400,
                                detail=f"unknown estimator {estimator!r}")
        try:
            modality_config = configuration_for(
                request.config_id,
                baseline_variant=config.baseline_variant,
                prompt_style=request.prompt_style,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

        assembled = expand(sample, modality_config)
        edited = False
        overrides = request.overrides
        if overrides is not None:
            updates = {}
            if overrides.image_b64 is not None:
                try:
                    updates["image_bytes"] = base64.b64decode(overrides.image_b64)
                except ValueError as exc:
                    raise HTTPException(status_code=400,
                                        detail="image_b64 is not valid base64") from exc
            if overrides.question is not None:
                updates["question_text"] = overrides.question
            if overrides.context is not None:
                updates["context_text"] = overrides.context
            if overrides.description is not None:
                updates["description_text"] = overrides.description
            if updates:
                edited = True
                assembled = replace(assembled, **updates)

        noise_sigma = None
        noise_seed = None
        if request.noise is not None:
            noise_sigma = request.noise.sigma
            noise_seed = request.noise.seed
            if noise_seed is None:
                noise_seed = stable_seed(config.seed, request.sample_id,
                                         request.config_id, "noise") % (2**31)
            if noise_sigma > 0 and assembled.image_bytes is not None:
                edited = True
                assembled = replace(
                    assembled,
                    image_bytes=apply_gaussian_noise(assembled.image_bytes,
                                                     noise_sigma, noise_seed),
                )

        if edited:
            # Scripted mocks key on sample ids; rekey edited inputs so they
            # take the content-hashed path instead of the preset script.
            assembled = replace(assembled, sample_id=f"edited:{assembled.sample_id}")

        n_samples = request.n_samples or config.n_samples
        temperature = request.temperature if request.temperature is not None \
            else config.temperature
        try:
            trace = adapter.generate(assembled, request.task, n_samples,
                                     temperature, config.seed)
            report = uncertainty_for_trace(trace, oracle, estimator)
            scores = relevance(trace.greedy)
        except AdapterError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        except ModalBenchError as exc:
            raise HTTPException(status_code=502,
                                detail=f"metric computation failed: {exc}") from exc

        texts = trace.sample_texts
        clusters = [
            {
                "members": list(c.member_indices),
                "representative": c.representative_index,
                "texts": [texts[i] for i in c.member_indices],
                "probability": report.clustering.cluster_probs[i],
            }
            for i, c in enumerate(report.clustering.clusters)
        ]
        return {
            "generation": {
                "greedy": trace.greedy.output_text,
                "samples": texts,
            },
            "uncertainty": {
                "entropy": report.entropy,
                "n_clusters": report.n_clusters,
                "n_samples": report.n_samples,
                "temperature": report.temperature,
                "estimator": estimator,
                "clusters": clusters,
            },
            "relevance": {
                "r_image": scores.r_image,
                "r_question": scores.r_question,
                "r_context": scores.r_context,
                "raw_mass": scores.raw_mass,
                "has_context": scores.has_context,
            },
            "metadata": {
                "sample_id": request.sample_id,
                "config_id": request.config_id,
                "task": request.task,
                "model_id": adapter.model_id,
                "edited": edited,
                "noise_sigma": noise_sigma,
                "noise_seed": noise_seed,
                "default_noise_sigma": NOISE_SIGMA,
                "seed": config.seed,
            },
        }

    def _load_reports() -> dict[str, dict]:
        reports = {}
        if runs_root.is_dir():
            for run_dir in sorted(runs_root.iterdir()):
                report_path = run_dir / "report" / "report.json"
                if report_path.is_file():
                    reports[run_dir.name] = json.loads(
                        report_path.read_text(encoding="utf-8"))
        return reports

    @app.get("/runs")
    def list_runs():
        return {"runs": sorted(_load_reports())}

    @app.get("/runs/{run_id}/report")
    def get_report(run_id: str):
        reports = _load_reports()
        if run_id not in reports:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id!r}")
        return reports[run_id]

    @app.get("/averages")
    def averages():
        pooled: dict[tuple[str, str], dict[str, list[float]]] = {}
        for report in _load_reports().values():
            model_id = report.get("model_id", "unknown")
            for row in report.get("per_sample", []):
                bucket = pooled.setdefault((model_id, row["task"]), {
                    "entropy": [], "r_image": [], "r_question": [], "r_context": [],
                })
                bucket["entropy"].append(row["entropy"])
                bucket["r_image"].append(row["r_image"])
                bucket["r_question"].append(row["r_question"])
                bucket["r_context"].append(row["r_context"])
        models: dict[str, dict] = {}
        for (model_id, task), bucket in sorted(pooled.items()):
            models.setdefault(model_id, {})[task] = {
                "entropy_mean": sum(bucket["entropy"]) / len(bucket["entropy"]),
                "r_image_mean": sum(bucket["r_image"]) / len(bucket["r_image"]),
                "r_question_mean": sum(bucket["r_question"]) / len(bucket["r_question"]),
                "r_context_mean": sum(bucket["r_context"]) / len(bucket["r_context"]),
                "n": len(bucket["entropy"]),
            }
        return {"models": models}

    return app
