"""Benchmark orchestration: expand, generate, persist traces, report.

Persisted traces are the source of truth; every metric in the report is
recomputable offline from the run's ``traces/*.traces.jsonl`` files (the
``metrics`` CLI subcommands do exactly that, built on the same aggregation
functions). A run directory looks like::

    <output_dir>/
      run.json                # spec + recorded decision knobs
      PARTIAL                 # present only while running / after interrupt
      traces/<config>.traces.jsonl
      report/report.json      # machine-readable aggregates + per-sample rows
      report/*.csv            # plotting tables
      logs/judge.jsonl        # judge request/response log (key redacted)

Reports contain no timestamps: a rerun with identical spec, seed, and mock
adapter is byte-identical. Interrupted runs resume from persisted traces and
converge to the same report.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import attention, risk, scoring, uncertainty
from .adapter_client import HttpAdapter, RemoteEntailmentOracle
from .dataset import (
    ANSWER_PROMPTS,
    CONFIG_IDS,
    NOISE_SIGMA,
    REASONING_PROMPTS,
    Sample,
    configuration_for,
    expand,
    load_manifest,
)
from .errors import AdapterError, ParseError, ValidationError
from .mock_adapter import AdapterClient, MockAdapter, MockScenario
from .traces import InferenceTrace, parse_trace_stream, trace_to_json_line
from .uncertainty import ExactMatchOracle, QuestionContextOracle

logger = logging.getLogger(__name__)

TASKS = ("answer", "reasoning")
REPORT_VERSION = 1


def config_slug(config_id: str) -> str:
    """Filesystem-safe name for a configuration id."""
    return (config_id.replace("C+", "Cp").replace("C-", "Cn")
            .replace("+", "_").lower())


@dataclass
class RunSpec:
    """Everything needed to reproduce a benchmark run."""

    dataset_path: str
    output_dir: str
    adapter_endpoint: str = "mock"  # URL or "mock"
    mock_scenario_path: str | None = None
    model_id: str = ""  # informative label; adapters may override
    config_ids: tuple[str, ...] = CONFIG_IDS
    baseline_variant: str = "black"
    prompt_style: str = "standard"
    image_descriptions: dict[str, str] = field(default_factory=dict)
    n_samples: int = 10
    temperature: float = 0.9
    oracle: str = "exact"  # exact | remote
    estimator: str = "discrete"  # discrete | likelihood
    seed: int = 0
    judge: str = "none"  # none | mock | judge endpoint URL
    max_workers: int = 4

    def __post_init__(self):
        unknown = [c for c in self.config_ids if c not in CONFIG_IDS]
        if unknown:
            raise ValueError(f"unknown config ids: {unknown}")
        if not self.config_ids:
            raise ValueError("config_ids must not be empty")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.n_samples > 1 and self.temperature <= 0:
            raise ValueError("temperature must be > 0 when sampling")
        if self.oracle not in ("exact", "remote"):
            raise ValueError(f"unknown oracle {self.oracle!r}")
        if self.estimator not in ("discrete", "likelihood"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.adapter_endpoint == "mock" and not self.mock_scenario_path:
            raise ValueError("mock adapter requires mock_scenario_path")

    def to_dict(self) -> dict:
        return {
            "dataset_path": self.dataset_path,
            "output_dir": self.output_dir,
            "adapter_endpoint": self.adapter_endpoint,
            "mock_scenario_path": self.mock_scenario_path,
            "model_id": self.model_id,
            "config_ids": list(self.config_ids),
            "baseline_variant": self.baseline_variant,
            "prompt_style": self.prompt_style,
            "image_descriptions": dict(self.image_descriptions),
            "n_samples": self.n_samples,
            "temperature": self.temperature,
            "oracle": self.oracle,
            "estimator": self.estimator,
            "seed": self.seed,
            "judge": self.judge,
            "max_workers": self.max_workers,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RunSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown run spec fields: {sorted(unknown)}")
        kwargs = dict(payload)
        if "config_ids" in kwargs:
            kwargs["config_ids"] = tuple(kwargs["config_ids"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise ParseError(f"run spec is not valid JSON: {exc}") from exc


@dataclass(frozen=True)
class TraceRef:
    """A parsed trace plus where it lives on disk (file, 1-based line)."""

    trace: InferenceTrace
    file: str
    line: int

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.trace.sample_id, self.trace.config_id, self.trace.task)


@dataclass
class RunReport:
    data: dict
    run_dir: Path


def make_adapter(spec: RunSpec) -> AdapterClient:
    endpoint = spec.adapter_endpoint
    if endpoint == "mock":
        return MockAdapter(MockScenario.from_file(spec.mock_scenario_path))
    if endpoint == "env":
        endpoint = os.environ.get("ADAPTER_URL", "")
        if not endpoint:
            raise ValueError("adapter_endpoint 'env' requires ADAPTER_URL to be set")
    return HttpAdapter(endpoint, model_id=spec.model_id)


def make_judge(spec: RunSpec, log_path: Path | None) -> scoring.JudgeClient | None:
    """Judge client for URL or 'env' specs; mock judging is scenario-driven."""
    if spec.judge in ("none", "mock"):
        return None
    endpoint = spec.judge
    if endpoint == "env":
        endpoint = os.environ.get("JUDGE_URL", "")
        if not endpoint:
            raise ValueError("judge 'env' requires JUDGE_URL to be set")
    api_key = os.environ.get("JUDGE_API_KEY", "")
    return scoring.HttpJudgeClient(endpoint, api_key=api_key,
                                   model_id="judge", log_path=log_path)


def oracle_factory(spec: RunSpec) -> Callable[[InferenceTrace], uncertainty.EntailmentOracle]:
    if spec.oracle == "exact":
        shared = ExactMatchOracle()
        return lambda trace: shared
    base_url = spec.adapter_endpoint
    if base_url in ("mock", "env"):
        base_url = os.environ.get("ADAPTER_URL", "")
    if not base_url:
        raise ValueError("remote oracle needs an adapter endpoint (or ADAPTER_URL)")
    remote = RemoteEntailmentOracle(base_url)

    def per_trace(trace: InferenceTrace) -> uncertainty.EntailmentOracle:
        question = trace.metadata.get("question") or ""
        return QuestionContextOracle(remote, question) if question else remote

    return per_trace


# --- trace persistence --------------------------------------------------


def scan_traces(traces_dir: Path, repair: bool = False) -> list[TraceRef]:
    """Parse every trace file in a run, keeping file/line references.

    With ``repair``, a truncated final line (crash mid-write) is dropped so
    the run can resume cleanly; corruption anywhere else still raises.
    """
    refs: list[TraceRef] = []
    if not traces_dir.is_dir():
        return refs
    for path in sorted(traces_dir.glob("*.traces.jsonl")):
        raw_lines = path.read_bytes().splitlines(keepends=True)
        parsed = 0
        for line_no, raw in enumerate(raw_lines, start=1):
            if not raw.strip():
                continue
            try:
                trace = next(iter(parse_trace_stream([raw])))
            except ParseError:
                if repair and line_no == len(raw_lines):
                    logger.warning("dropping truncated final line of %s", path)
                    path.write_bytes(b"".join(raw_lines[: line_no - 1]))
                    break
                raise
            refs.append(TraceRef(trace=trace, file=f"traces/{path.name}", line=line_no))
            parsed += 1
    return refs


# --- aggregation (shared by run reports and the metrics CLI) -------------


def _record_key(ref: TraceRef) -> tuple[int, str, str]:
    config_order = {cid: i for i, cid in enumerate(CONFIG_IDS)}
    return (config_order.get(ref.trace.config_id, len(CONFIG_IDS)),
            ref.trace.sample_id, ref.trace.task)


def sort_refs(refs: Sequence[TraceRef]) -> list[TraceRef]:
    return sorted(refs, key=_record_key)


def _summary(values: Sequence[float]) -> dict | None:
    if not values:
        return None
    array = np.asarray(values, dtype=np.float64)
    q25, median, q75 = np.percentile(array, [25, 50, 75])
    return {
        "mean": float(array.mean()),
        "min": float(array.min()),
        "q25": float(q25),
        "median": float(median),
        "q75": float(q75),
        "max": float(array.max()),
        "n": int(array.size),
    }


def aggregate_attention(refs: Sequence[TraceRef]) -> dict:
    """Relevance of each modality (greedy record) per (config, task)."""
    per_record: dict[str, dict] = {}
    grouped: dict[tuple[str, str], list[attention.RelevanceScores]] = {}
    for ref in sort_refs(refs):
        scores = attention.relevance(ref.trace.greedy)
        key = f"{ref.trace.sample_id}|{ref.trace.config_id}|{ref.trace.task}"
        per_record[key] = {
            "r_image": scores.r_image,
            "r_question": scores.r_question,
            "r_context": scores.r_context,
            "has_context": scores.has_context,
            "raw_other": scores.raw_mass["other"],
        }
        grouped.setdefault((ref.trace.config_id, ref.trace.task), []).append(scores)

    groups = {}
    for (config_id, task), batch in grouped.items():
        diffs = attention.attention_differences(batch)
        groups.setdefault(config_id, {})[task] = {
            "r_image_mean": float(np.mean([s.r_image for s in batch])),
            "r_question_mean": float(np.mean([s.r_question for s in batch])),
            "r_context_mean": float(np.mean([s.r_context for s in batch])),
            "mean_image_minus_question": diffs.mean_image_minus_question,
            "mean_image_minus_context": diffs.mean_image_minus_context,
            "n": len(batch),
        }
    return {"groups": groups, "per_record": per_record}


def aggregate_uncertainty(refs: Sequence[TraceRef],
                          oracle_for: Callable[[InferenceTrace], uncertainty.EntailmentOracle],
                          estimator: str) -> dict:
    """Semantic entropy per trace plus distribution summaries."""
    per_record: dict[str, dict] = {}
    grouped: dict[tuple[str, str], list[float]] = {}
    for ref in sort_refs(refs):
        report = uncertainty.uncertainty_for_trace(ref.trace, oracle_for(ref.trace),
                                                   estimator)
        key = f"{ref.trace.sample_id}|{ref.trace.config_id}|{ref.trace.task}"
        per_record[key] = {
            "entropy": report.entropy,
            "n_clusters": report.n_clusters,
            "n_samples": report.n_samples,
            "temperature": report.temperature,
        }
        grouped.setdefault((ref.trace.config_id, ref.trace.task), []).append(report.entropy)

    groups: dict[str, dict] = {}
    for (config_id, task), values in grouped.items():
        groups.setdefault(config_id, {})[task] = _summary(values)
    return {"estimator": estimator, "groups": groups, "per_record": per_record}


def aggregate_score(refs: Sequence[TraceRef], truths: dict[str, bool]) -> dict:
    """Answer verdicts vs ground truth per configuration."""
    per_record: dict[str, dict] = {}
    grouped: dict[str, list[tuple[scoring.ParsedAnswer, bool]]] = {}
    for ref in sort_refs(refs):
        if ref.trace.task != "answer":
            continue
        if ref.trace.sample_id not in truths:
            raise ValidationError(ref.trace.sample_id, "id",
                                  "trace sample missing from dataset")
        parsed = scoring.parse_answer(ref.trace.greedy.output_text)
        truth = truths[ref.trace.sample_id]
        correct = (parsed.verdict == "yes") == truth and \
            parsed.verdict != scoring.VERDICT_UNPARSEABLE
        key = f"{ref.trace.sample_id}|{ref.trace.config_id}"
        per_record[key] = {
            "verdict": parsed.verdict,
            "matched_text": parsed.matched_text,
            "correct": bool(correct),
        }
        grouped.setdefault(ref.trace.config_id, []).append((parsed, truth))

    groups = {}
    for config_id, pairs in grouped.items():
        matrix = scoring.score_answers([p for p, _ in pairs], [t for _, t in pairs])
        groups[config_id] = {
            "accuracy": matrix.accuracy,
            "tp": matrix.tp, "tn": matrix.tn, "fp": matrix.fp, "fn": matrix.fn,
            "n_unparseable": matrix.n_unparseable,
            "tpr": matrix.tpr, "tnr": matrix.tnr,
            "n": matrix.n,
        }
    return {"groups": groups, "per_record": per_record}


def aggregate_risk(refs: Sequence[TraceRef], truths: dict[str, bool],
                   oracle_for, estimator: str) -> dict:
    """Risk-coverage curves over answer failures ranked by semantic entropy."""
    score_data = aggregate_score(refs, truths)
    entropy_data = aggregate_uncertainty(
        [r for r in refs if r.trace.task == "answer"], oracle_for, estimator)

    outcomes_by_config: dict[str, list[risk.ScoredOutcome]] = {}
    for ref in sort_refs(refs):
        if ref.trace.task != "answer":
            continue
        key = f"{ref.trace.sample_id}|{ref.trace.config_id}"
        entropy_key = f"{key}|answer"
        failure = 0 if score_data["per_record"][key]["correct"] else 1
        outcomes_by_config.setdefault(ref.trace.config_id, []).append(
            risk.ScoredOutcome(
                sample_id=ref.trace.sample_id,
                failure=failure,
                uncertainty=entropy_data["per_record"][entropy_key]["entropy"],
            ))

    table = risk.augrc_by_group(outcomes_by_config)
    groups = {
        config_id: {
            "augrc": curve.augrc,
            "curve": [[p.coverage, p.joint_risk] for p in curve.points],
            "n": len(outcomes_by_config[config_id]),
        }
        for config_id, curve in table.curves.items()
    }
    return {"groups": groups, "skipped": [str(k) for k in table.skipped]}


def correlation_table(attention_data: dict, score_data: dict) -> dict:
    """Pooled correlation between modality relevance and per-sample correctness."""
    rows = []
    for key, scores in attention_data["per_record"].items():
        sample_id, config_id, task = key.split("|")
        if task != "answer":
            continue
        outcome = score_data["per_record"].get(f"{sample_id}|{config_id}")
        if outcome is None:
            continue
        rows.append((scores, 1.0 if outcome["correct"] else 0.0))

    table: dict[str, float | None] = {}
    for name, getter in (("image", "r_image"), ("question", "r_question"),
                         ("context", "r_context")):
        values = [r[getter] for r, _ in rows]
        correct = [c for _, c in rows]
        try:
            table[name] = scoring.pearson(values, correct)
        except Exception:
            table[name] = None
    return table


# --- run driver -----------------------------------------------------------


def _judge_scores(spec: RunSpec, refs: Sequence[TraceRef],
                  samples_by_id: dict[str, Sample],
                  configs_by_id: dict[str, object],
                  scenario: MockScenario | None,
                  judge_client: scoring.JudgeClient | None,
                  model_id: str) -> dict[str, dict]:
    """Judge the greedy reasoning of every (sample, config), bounded concurrency."""
    if spec.judge == "none":
        return {}

    answer_texts = {
        (r.trace.sample_id, r.trace.config_id): r.trace.greedy.output_text
        for r in refs if r.trace.task == "answer"
    }
    jobs = []
    for ref in sort_refs(refs):
        if ref.trace.task != "reasoning":
            continue
        sample = samples_by_id.get(ref.trace.sample_id)
        config = configs_by_id.get(ref.trace.config_id)
        if sample is None or config is None:
            continue
        assembled = expand(sample, config)
        item = scoring.ReasoningItem(
            question=ref.trace.metadata.get("question", sample.question),
            image=assembled.image_bytes,
            answer=answer_texts.get((ref.trace.sample_id, ref.trace.config_id), ""),
            reasoning=ref.trace.greedy.output_text,
        )
        jobs.append((ref.trace.sample_id, ref.trace.config_id, item))

    def run_one(job):
        sample_id, config_id, item = job
        client = judge_client
        if client is None:
            if spec.judge != "mock" or scenario is None:
                raise ValueError("judge='mock' requires the mock adapter scenario")
            client = scoring.MockJudgeClient(scenario.judge_reply(sample_id, config_id))
        key = f"{model_id}|{sample_id}|{config_id}"
        score = scoring.judge_reasoning(item, client, idempotency_key=key)
        return sample_id, config_id, score

    results: dict[str, dict] = {}
    with ThreadPoolExecutor(max_workers=spec.max_workers) as pool:
        for sample_id, config_id, score in pool.map(run_one, jobs):
            results[f"{sample_id}|{config_id}"] = {
                "score": score.score,
                "judge_model": score.judge_model,
            }
    return results


def _judge_histograms(judge_scores: dict[str, dict],
                      refs: Sequence[TraceRef]) -> dict[str, dict]:
    configs = sorted({r.trace.config_id for r in refs},
                     key=lambda c: CONFIG_IDS.index(c) if c in CONFIG_IDS else 99)
    out = {}
    for config_id in configs:
        values = [v["score"] for k, v in judge_scores.items()
                  if k.split("|")[1] == config_id]
        if not values:
            continue
        histogram = {str(s): values.count(s) for s in range(11)}
        out[config_id] = {
            "histogram": histogram,
            "mean": float(np.mean(values)),
            "n": len(values),
        }
    return out


def compute_report(refs: Sequence[TraceRef], truths: dict[str, bool],
                   spec: RunSpec, model_id: str,
                   judge_scores: dict[str, dict]) -> dict:
    oracle_for = oracle_factory(spec)
    attention_data = aggregate_attention(refs)
    uncertainty_data = aggregate_uncertainty(refs, oracle_for, spec.estimator)
    score_data = aggregate_score(refs, truths)
    risk_data = aggregate_risk(refs, truths, oracle_for, spec.estimator)
    judge_data = _judge_histograms(judge_scores, refs)

    config_sections: dict[str, dict] = {}
    for config_id in spec.config_ids:
        section: dict = {
            "degenerate_baseline": config_id == "Q" and spec.baseline_variant == "none",
        }
        for task in TASKS:
            task_section = {
                "semantic_entropy": uncertainty_data["groups"].get(config_id, {}).get(task),
                "relevance": attention_data["groups"].get(config_id, {}).get(task),
            }
            if task == "answer":
                task_section["score"] = score_data["groups"].get(config_id)
                task_section["risk"] = risk_data["groups"].get(config_id)
            else:
                task_section["judge"] = judge_data.get(config_id)
            section[task] = task_section
        config_sections[config_id] = section

    per_sample = []
    for ref in sort_refs(refs):
        key = f"{ref.trace.sample_id}|{ref.trace.config_id}|{ref.trace.task}"
        score_key = f"{ref.trace.sample_id}|{ref.trace.config_id}"
        row = {
            "sample_id": ref.trace.sample_id,
            "config_id": ref.trace.config_id,
            "task": ref.trace.task,
            "trace_file": ref.file,
            "trace_line": ref.line,
            "entropy": uncertainty_data["per_record"][key]["entropy"],
            "n_clusters": uncertainty_data["per_record"][key]["n_clusters"],
            **attention_data["per_record"][key],
        }
        if ref.trace.task == "answer":
            row.update(score_data["per_record"][score_key])
        else:
            judged = judge_scores.get(score_key)
            row["judge_score"] = judged["score"] if judged else None
        per_sample.append(row)

    return {
        "report_version": REPORT_VERSION,
        "model_id": model_id,
        "spec": spec.to_dict(),
        "decisions": {
            "noise_sigma": NOISE_SIGMA,
            "baseline_variant": spec.baseline_variant,
            "answer_prompt": ANSWER_PROMPTS[spec.prompt_style],
            "reasoning_prompt": REASONING_PROMPTS[spec.prompt_style],
            "oracle": spec.oracle,
            "estimator": spec.estimator,
            "aggregation_weighting": "micro",
            "seed": spec.seed,
            "adapter_version": refs[0].trace.metadata.get("adapter_version")
            if refs else None,
            "attention_aggregation": refs[0].trace.metadata.get("attention_aggregation")
            if refs else None,
        },
        "configs": config_sections,
        "correlations": correlation_table(attention_data, score_data),
        "per_sample": per_sample,
        "skipped_groups": risk_data["skipped"],
    }


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_csv_cell(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_report_files(report: dict, run_dir: Path) -> None:
    report_dir = run_dir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    (report_dir / "report.json").write_text(_dump_json(report), encoding="utf-8")

    accuracy_rows = []
    uncertainty_rows = []
    relevance_rows = []
    judge_rows = []
    for config_id, section in report["configs"].items():
        score = section["answer"].get("score")
        if score:
            accuracy_rows.append([
                config_id, score["accuracy"], score["tp"], score["tn"], score["fp"],
                score["fn"], score["n_unparseable"], score["tpr"], score["tnr"],
            ])
        for task in TASKS:
            entropy = section[task]["semantic_entropy"]
            if entropy:
                uncertainty_rows.append([
                    config_id, task, entropy["mean"], entropy["min"], entropy["q25"],
                    entropy["median"], entropy["q75"], entropy["max"],
                ])
            rel = section[task]["relevance"]
            if rel:
                relevance_rows.append([
                    config_id, task, rel["r_image_mean"], rel["r_question_mean"],
                    rel["r_context_mean"], rel["mean_image_minus_question"],
                    rel["mean_image_minus_context"],
                ])
        judge = section["reasoning"].get("judge")
        if judge:
            for score_value in range(11):
                judge_rows.append([config_id, score_value,
                                   judge["histogram"][str(score_value)]])
        risk_section = section["answer"].get("risk")
        if risk_section:
            _write_csv(
                report_dir / f"grc_{config_slug(config_id)}.csv",
                ["coverage", "joint_risk"],
                risk_section["curve"],
            )

    _write_csv(report_dir / "accuracy.csv",
               ["config_id", "accuracy", "tp", "tn", "fp", "fn", "n_unparseable",
                "tpr", "tnr"], accuracy_rows)
    _write_csv(report_dir / "uncertainty.csv",
               ["config_id", "task", "mean", "min", "q25", "median", "q75", "max"],
               uncertainty_rows)
    _write_csv(report_dir / "relevance.csv",
               ["config_id", "task", "r_image_mean", "r_question_mean",
                "r_context_mean", "mean_image_minus_question",
                "mean_image_minus_context"], relevance_rows)
    _write_csv(report_dir / "judge.csv", ["config_id", "score", "count"], judge_rows)

    sample_rows = [
        [row["sample_id"], row["config_id"], row["task"], row.get("verdict"),
         row.get("correct"), row["entropy"], row["n_clusters"], row["r_image"],
         row["r_question"], row["r_context"], row.get("judge_score"),
         row["trace_file"], row["trace_line"]]
        for row in report["per_sample"]
    ]
    _write_csv(report_dir / "per_sample.csv",
               ["sample_id", "config_id", "task", "verdict", "correct", "entropy",
                "n_clusters", "r_image", "r_question", "r_context", "judge_score",
                "trace_file", "trace_line"], sample_rows)


def run_benchmark(spec: RunSpec, adapter: AdapterClient | None = None,
                  judge_client: scoring.JudgeClient | None = None) -> RunReport:
    """Run the full pipeline for a spec; resumable and deterministic.

    Every (sample x config) yields one greedy+sampled answer trace and one
    greedy+sampled reasoning trace, persisted before any metric computation.
    """
    samples = load_manifest(spec.dataset_path)
    samples_by_id = {s.id: s for s in samples}
    truths = {s.id: s.truth_is_yes for s in samples}

    run_dir = Path(spec.output_dir)
    traces_dir = run_dir / "traces"
    logs_dir = run_dir / "logs"
    for directory in (run_dir, traces_dir, run_dir / "report", logs_dir):
        directory.mkdir(parents=True, exist_ok=True)

    scenario = None
    if adapter is None:
        adapter = make_adapter(spec)
    if isinstance(adapter, MockAdapter):
        scenario = adapter.scenario
    model_id = adapter.model_id if not spec.model_id else spec.model_id
    if judge_client is None:
        judge_client = make_judge(spec, logs_dir / "judge.jsonl")

    (run_dir / "run.json").write_text(
        _dump_json({"spec": spec.to_dict(), "model_id": model_id,
                    "noise_sigma": NOISE_SIGMA}),
        encoding="utf-8")
    partial_marker = run_dir / "PARTIAL"
    partial_marker.write_text("run in progress or interrupted\n", encoding="utf-8")

    existing = scan_traces(traces_dir, repair=True)
    done_keys = {ref.key for ref in existing}

    configs_by_id = {}
    jobs = []
    for config_id in spec.config_ids:
        config = configuration_for(config_id, baseline_variant=spec.baseline_variant,
                                   prompt_style=spec.prompt_style)
        configs_by_id[config_id] = config
        for sample in samples:
            per_sample_config = config
            description = spec.image_descriptions.get(sample.id)
            if description:
                per_sample_config = replace(config, image_description=description)
            for task in TASKS:
                if (sample.id, config_id, task) in done_keys:
                    continue
                jobs.append((sample, per_sample_config, task))

    def generate(job):
        sample, config, task = job
        assembled = expand(sample, config)
        try:
            return adapter.generate(assembled, task, spec.n_samples,
                                    spec.temperature, spec.seed)
        except AdapterError:
            raise
        except Exception as exc:  # surface adapter bugs with context
            raise AdapterError(str(exc), sample_id=sample.id,
                               config_id=config.config_id) from exc

    if jobs:
        with ThreadPoolExecutor(max_workers=spec.max_workers) as pool:
            futures = [pool.submit(generate, job) for job in jobs]
            handles: dict[str, object] = {}
            try:
                for future in futures:
                    trace = future.result()
                    filename = f"{config_slug(trace.config_id)}.traces.jsonl"
                    handle = handles.get(filename)
                    if handle is None:
                        handle = open(traces_dir / filename, "ab")
                        handles[filename] = handle
                    handle.write(trace_to_json_line(trace))
                    handle.flush()
            finally:
                for handle in handles.values():
                    handle.close()

    refs = scan_traces(traces_dir)
    if not spec.model_id and refs:
        model_id = refs[0].trace.model_id  # traces carry the authoritative id
    judge_scores = _judge_scores(spec, refs, samples_by_id, configs_by_id,
                                 scenario, judge_client, model_id)
    report = compute_report(refs, truths, spec, model_id, judge_scores)
    write_report_files(report, run_dir)
    partial_marker.unlink(missing_ok=True)
    return RunReport(data=report, run_dir=run_dir)
