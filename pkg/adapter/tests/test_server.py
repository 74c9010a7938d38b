from __future__ import annotations

import base64

import httpx
import pytest
from fastapi.testclient import TestClient

from modalbench_adapter.nli import LexicalEntailment
from modalbench_adapter.server import create_app

from conftest import png_bytes

# Contract checks parse adapter output with the engine's trace parser: the
# JSONL line schema is the interface between the two packages.
from modalbench.attention import relevance
from modalbench.traces import trace_from_dict, validate_trace
from modalbench.uncertainty import ExactMatchOracle, uncertainty_for_trace


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def generate_body(task="answer", n_samples=10, temperature=0.9, image=True,
                  context=None):
    return {
        "input": {
            "sample_id": "s1",
            "config_id": "Q+I+C-" if context else "Q+I",
            "image_b64": base64.b64encode(png_bytes(256, 256)).decode("ascii")
            if image else None,
            "question_text": "Is the object visible in the scene?",
            "context_text": context,
            "answer_prompt": "Answer the question only with Yes or No.",
            "reasoning_prompt": "Explain your answer:",
        },
        "task": task,
        "n_samples": n_samples,
        "temperature": temperature,
        "seed": 7,
    }


class TestGenerate:
    def test_ten_samples_at_target_temperature(self, client):
        response = client.post("/generate", json=generate_body())
        assert response.status_code == 200, response.text
        trace = trace_from_dict(response.json())
        assert len(trace.samples) == 10
        assert all(r.sampling.temperature == 0.9 for r in trace.samples)

    def test_trace_passes_engine_validation_for_both_tasks(self, client):
        for task in ("answer", "reasoning"):
            for context in (None, "The scene usually hides the object."):
                response = client.post("/generate", json=generate_body(
                    task=task, n_samples=3, context=context))
                assert response.status_code == 200, response.text
                trace = trace_from_dict(response.json())
                validate_trace(trace)
                scores = relevance(trace.greedy)
                assert scores.r_image > 0
                report = uncertainty_for_trace(trace, ExactMatchOracle())
                assert report.entropy >= 0.0

    def test_greedy_repeatable(self, client):
        body = generate_body(n_samples=0)
        one = client.post("/generate", json=body).json()
        two = client.post("/generate", json=body).json()
        assert one == two

    def test_image_span_matches_model_token_count(self, client):
        response = client.post("/generate", json=generate_body(n_samples=1))
        span = response.json()["greedy"]["span_map"]["image_span"]
        assert span == [0, 16]  # 256x256 -> 4x4 grid

    def test_no_image_request(self, client):
        response = client.post("/generate", json=generate_body(image=False,
                                                               n_samples=1))
        assert response.status_code == 200
        trace = trace_from_dict(response.json())
        assert trace.greedy.span_map.image_span == (0, 0)

    def test_unknown_task_is_400(self, client):
        assert client.post("/generate",
                           json=generate_body(task="draw")).status_code == 400

    def test_malformed_body_is_400(self, client):
        assert client.post("/generate", json={"task": "answer"}).status_code == 400

    def test_empty_question_is_400(self, client):
        body = generate_body()
        body["input"]["question_text"] = "   "
        assert client.post("/generate", json=body).status_code == 400

    def test_health(self, client):
        body = client.get("/health").json()
        assert body["model_id"] == "tiny-attn-v1"
        assert body["nli_backend"]


class TestEntail:
    def test_reflexive_entailment(self, client):
        response = client.post("/entail", json={
            "premise": "The water is hot.", "hypothesis": "The water is hot."})
        assert response.json()["label"] == "entails"

    def test_opposite_verdicts_not_mutual(self, client):
        question = "Is the water hot?"
        forward = client.post("/entail", json={
            "premise": f"{question} Yes", "hypothesis": f"{question} No"}).json()
        backward = client.post("/entail", json={
            "premise": f"{question} No", "hypothesis": f"{question} Yes"}).json()
        assert "entails" not in (forward["label"], backward["label"])

    def test_deterministic(self, client):
        body = {"premise": "A bright scene.", "hypothesis": "A scene."}
        assert client.post("/entail", json=body).json() == \
            client.post("/entail", json=body).json()

    def test_malformed_body_is_400(self, client):
        assert client.post("/entail", json={"premise": "only"}).status_code == 400


class TestLexicalBackend:
    def test_containment_entails(self):
        backend = LexicalEntailment()
        assert backend.judge("The red ball is clearly visible", "red ball") == "entails"

    def test_contradiction_on_opposite_verdicts(self):
        backend = LexicalEntailment()
        assert backend.judge("Yes it is", "No it is not") == "contradicts"

    def test_neutral_otherwise(self):
        backend = LexicalEntailment()
        assert backend.judge("A cat sits", "A dog runs") == "neutral"


class TestJudgeProxy:
    def test_proxy_forwards_and_returns_upstream_json(self, monkeypatch):
        def fake_post(url, json=None, headers=None, timeout=None):
            request = httpx.Request("POST", url)
            assert url == "http://judge.test/chat/completions"
            return httpx.Response(200, json={"choices": [{"message":
                                                          {"content": "8"}}]},
                                  request=request)

        monkeypatch.setattr(httpx, "post", fake_post)
        client = TestClient(create_app(judge_url="http://judge.test"))
        response = client.post("/judge", json={"body": {"model": "judge"}})
        assert response.status_code == 200
        assert response.json()["choices"][0]["message"]["content"] == "8"

    def test_unconfigured_proxy_is_502(self, client):
        assert client.post("/judge", json={"body": {}}).status_code == 502
