"""Evaluation engine for modality-intervention studies of vision-language models.

The engine consumes serialized inference traces, so every metric — answer
accuracy, semantic entropy, silent-failure risk, attention attribution — is
computable without a GPU or a model runtime. A scenario-driven mock adapter
covers tests and demos; real adapters talk HTTP.
"""

from .attention import (
    AttentionDifferences,
    RelevanceScores,
    attention_differences,
    average_attention_vector,
    relevance,
)
from .bench import RunReport, RunSpec, run_benchmark
from .dataset import (
    AssembledInput,
    ModalityConfiguration,
    Sample,
    all_configurations,
    apply_gaussian_noise,
    configuration_for,
    expand,
    load_manifest,
    synthesize_baseline_image,
)
from .mock_adapter import MockAdapter, MockScenario
from .risk import RiskCoverageCurve, ScoredOutcome, augrc_by_group, grc_curve
from .scoring import (
    ConfusionMatrix,
    JudgeScore,
    ParsedAnswer,
    judge_reasoning,
    parse_answer,
    pearson,
    score_answers,
)
from .traces import (
    GenerationRecord,
    InferenceTrace,
    SpanMap,
    parse_trace_stream,
    read_trace_file,
    write_trace,
    write_trace_file,
)
from .uncertainty import (
    EntailmentOracle,
    ExactMatchOracle,
    SemanticClustering,
    UncertaintyReport,
    cluster,
    semantic_entropy,
    uncertainty_for_trace,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledInput",
    "AttentionDifferences",
    "ConfusionMatrix",
    "EntailmentOracle",
    "ExactMatchOracle",
    "GenerationRecord",
    "InferenceTrace",
    "JudgeScore",
    "MockAdapter",
    "MockScenario",
    "ModalityConfiguration",
    "ParsedAnswer",
    "RelevanceScores",
    "RiskCoverageCurve",
    "RunReport",
    "RunSpec",
    "Sample",
    "ScoredOutcome",
    "SemanticClustering",
    "SpanMap",
    "UncertaintyReport",
    "all_configurations",
    "apply_gaussian_noise",
    "attention_differences",
    "augrc_by_group",
    "average_attention_vector",
    "cluster",
    "configuration_for",
    "expand",
    "grc_curve",
    "judge_reasoning",
    "load_manifest",
    "parse_answer",
    "parse_trace_stream",
    "pearson",
    "read_trace_file",
    "relevance",
    "run_benchmark",
    "score_answers",
    "semantic_entropy",
    "synthesize_baseline_image",
    "uncertainty_for_trace",
    "write_trace",
    "write_trace_file",
]
