from __future__ import annotations

import math
from pathlib import Path

from modalbench.attention import relevance
from modalbench.traces import read_trace_file
from modalbench.uncertainty import ExactMatchOracle, uncertainty_for_trace

FIXTURE = Path(__file__).parent / "fixtures" / "tiny.traces.jsonl"


def test_recorded_fixture_passes_engine_parser_and_invariants():
    traces = read_trace_file(FIXTURE)  # parser validates every invariant
    assert len(traces) == 4
    assert {t.task for t in traces} == {"answer", "reasoning"}
    for trace in traces:
        assert len(trace.samples) == 10
        assert all(r.sampling.temperature == 0.9 for r in trace.samples)


def test_recorded_fixture_supports_engine_metrics():
    for trace in read_trace_file(FIXTURE):
        scores = relevance(trace.greedy)
        assert abs(scores.r_image + scores.r_question + scores.r_context - 1.0) < 1e-9
        report = uncertainty_for_trace(trace, ExactMatchOracle())
        assert 0.0 <= report.entropy <= math.log(max(report.n_clusters, 1)) + 1e-9


def test_fixture_matches_current_runtime_output():
    # The committed recording must stay reproducible by the shipped weights.
    import json

    from conftest import generation_input
    from modalbench_adapter.runtime import TinyRuntime

    runtime = TinyRuntime()
    recorded = FIXTURE.read_text(encoding="utf-8").strip().split("\n")
    payload = generation_input(sample_id="s1", config_id="Q+I")
    fresh = runtime.generate_trace(payload, "answer", n_samples=10,
                                   temperature=0.9, seed=7)
    assert json.loads(recorded[0]) == fresh
