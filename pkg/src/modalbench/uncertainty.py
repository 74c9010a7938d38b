"""Meaning-level uncertainty: entailment clustering and semantic entropy.

Sampled generations are grouped greedily by bidirectional entailment — a text
joins the first cluster whose representative it mutually entails — and the
entropy over cluster probabilities quantifies how semantically spread out the
samples are. Zero entropy means every sample lands in one cluster (maximal
confidence).

Two probability estimators are available: ``discrete`` uses cluster member
fractions; ``likelihood`` renormalizes sequence probabilities from summed
token log-likelihoods over the sampled set, then sums them per cluster. The
discrete form is the default (it avoids sequence-length bias); the choice is
recorded in reports.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, replace
from typing import Protocol, Sequence

from .errors import EmptyClustering, OracleFailure
from .traces import InferenceTrace

ENTAILS = "entails"
NEUTRAL = "neutral"
CONTRADICTS = "contradicts"
ENTAILMENT_LABELS = (ENTAILS, NEUTRAL, CONTRADICTS)

ESTIMATORS = ("discrete", "likelihood")


class EntailmentOracle(Protocol):
    """Directional entailment judgment between two texts.

    Implementations must be deterministic for fixed inputs within one run
    (remote backends cache their calls).
    """

    def judge(self, premise: str, hypothesis: str) -> str: ...


def normalize_answer_text(text: str) -> str:
    """Trim, casefold, and strip trailing punctuation from a short answer."""
    return text.strip().rstrip(string.punctuation + string.whitespace).casefold()


class ExactMatchOracle:
    """Test oracle: mutual entailment iff the normalized texts are equal."""

    def judge(self, premise: str, hypothesis: str) -> str:
        if normalize_answer_text(premise) == normalize_answer_text(hypothesis):
            return ENTAILS
        return NEUTRAL


class QuestionContextOracle:
    """Wraps an oracle so both sides are judged in the question's context."""

    def __init__(self, inner: EntailmentOracle, question: str):
        self._inner = inner
        self._question = question.strip()

    def judge(self, premise: str, hypothesis: str) -> str:
        return self._inner.judge(
            f"{self._question} {premise}", f"{self._question} {hypothesis}"
        )


@dataclass(frozen=True)
class SemanticCluster:
    member_indices: tuple[int, ...]
    representative_index: int


@dataclass(frozen=True)
class SemanticClustering:
    """A partition of sample indices into meaning-equivalence clusters."""

    clusters: tuple[SemanticCluster, ...]
    estimator: str = "discrete"
    cluster_probs: tuple[float, ...] | None = None

    @property
    def n_samples(self) -> int:
        return sum(len(c.member_indices) for c in self.clusters)


@dataclass(frozen=True)
class UncertaintyReport:
    """Semantic entropy for one (sample, configuration, task) trace."""

    sample_id: str
    config_id: str
    task: str
    entropy: float
    n_clusters: int
    clustering: SemanticClustering
    temperature: float
    n_samples: int


def _judge_checked(oracle: EntailmentOracle, premise: str, hypothesis: str,
                   index_a: int, index_b: int) -> str:
    try:
        label = oracle.judge(premise, hypothesis)
    except OracleFailure as exc:
        raise OracleFailure(
            f"entailment backend failed for texts ({index_a}, {index_b}): {exc}"
        ) from exc
    if label not in ENTAILMENT_LABELS:
        raise OracleFailure(
            f"entailment backend returned {label!r} for texts ({index_a}, {index_b})"
        )
    return label


def cluster(texts: Sequence[str], oracle: EntailmentOracle,
            estimator: str = "discrete") -> SemanticClustering:
    """Greedy bidirectional-entailment clustering (probabilities unset).

    Texts are visited in input order and compared against each existing
    cluster's representative (its first member); a text joins the first
    cluster where both directions yield entailment, otherwise it opens a new
    cluster. Order dependence under non-transitive oracles is accepted.
    """
    if not texts:
        raise EmptyClustering("no texts to cluster")
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}")

    members: list[list[int]] = []
    representatives: list[int] = []
    for i, text in enumerate(texts):
        joined = False
        for cluster_idx, rep_idx in enumerate(representatives):
            rep_text = texts[rep_idx]
            forward = _judge_checked(oracle, rep_text, text, rep_idx, i)
            if forward != ENTAILS:
                continue
            backward = _judge_checked(oracle, text, rep_text, i, rep_idx)
            if backward == ENTAILS:
                members[cluster_idx].append(i)
                joined = True
                break
        if not joined:
            members.append([i])
            representatives.append(i)

    return SemanticClustering(
        clusters=tuple(
            SemanticCluster(member_indices=tuple(m), representative_index=r)
            for m, r in zip(members, representatives)
        ),
        estimator=estimator,
    )


def cluster_probabilities(clustering: SemanticClustering,
                          logprobs: Sequence[float] | None = None) -> tuple[float, ...]:
    """Per-cluster probabilities under the clustering's estimator."""
    if not clustering.clusters:
        raise EmptyClustering("clustering has no clusters")
    total = clustering.n_samples
    if clustering.estimator == "discrete":
        return tuple(len(c.member_indices) / total for c in clustering.clusters)

    if logprobs is None or len(logprobs) != total:
        raise ValueError(
            "likelihood estimator needs one sequence log-likelihood per sample"
        )
    # Renormalize sequence probabilities over the sampled set in log space.
    log_norm = _logsumexp(logprobs)
    return tuple(
        math.exp(_logsumexp([logprobs[i] for i in c.member_indices]) - log_norm)
        for c in clustering.clusters
    )


def _logsumexp(values: Sequence[float]) -> float:
    peak = max(values)
    if math.isinf(peak):
        return peak
    return peak + math.log(sum(math.exp(v - peak) for v in values))


def semantic_entropy(clustering: SemanticClustering,
                     logprobs: Sequence[float] | None = None) -> float:
    """Entropy (nats) over cluster probabilities."""
    probs = cluster_probabilities(clustering, logprobs)
    # + 0.0 normalizes the -0.0 that a single cluster would produce.
    return -sum(p * math.log(p) for p in probs if p > 0.0) + 0.0


def with_probabilities(clustering: SemanticClustering,
                       logprobs: Sequence[float] | None = None) -> SemanticClustering:
    return replace(clustering, cluster_probs=cluster_probabilities(clustering, logprobs))


def uncertainty_for_trace(trace: InferenceTrace, oracle: EntailmentOracle,
                          estimator: str = "discrete") -> UncertaintyReport:
    """Cluster a trace's sampled outputs and compute semantic entropy."""
    if not trace.samples:
        raise EmptyClustering(
            f"trace {trace.sample_id}/{trace.config_id} has no sampled generations"
        )
    clustering = cluster(trace.sample_texts, oracle, estimator)
    logprobs = None
    if estimator == "likelihood":
        logprobs = [sum(record.token_logprobs) for record in trace.samples]
    clustering = with_probabilities(clustering, logprobs)
    entropy = -sum(p * math.log(p) for p in clustering.cluster_probs if p > 0.0) + 0.0
    return UncertaintyReport(
        sample_id=trace.sample_id,
        config_id=trace.config_id,
        task=trace.task,
        entropy=entropy,
        n_clusters=len(clustering.clusters),
        clustering=clustering,
        temperature=trace.samples[0].sampling.temperature,
        n_samples=len(trace.samples),
    )
