from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from modalbench.mock_adapter import MockEntry, MockGeneration, MockScenario
from modalbench.traces import (
    GenerationRecord,
    InferenceTrace,
    Sampling,
    SpanMap,
)


def write_image(path: Path, color=(120, 30, 200), size=(12, 10)) -> Path:
    array = np.zeros((size[1], size[0], 3), dtype=np.uint8)
    array[:, :] = color
    Image.fromarray(array, mode="RGB").save(path)
    return path


def write_dataset(root: Path, n_samples: int = 2, tags=None) -> Path:
    """Create a tiny manifest with synthetic images alongside."""
    root.mkdir(parents=True, exist_ok=True)
    samples = []
    for i in range(n_samples):
        sample_id = f"s{i:03d}"
        write_image(root / f"{sample_id}.png", color=(10 * (i % 20), 80, 160))
        write_image(root / f"{sample_id}_annotated.png", color=(200, 10 * (i % 20), 40))
        samples.append({
            "id": sample_id,
            "image": f"{sample_id}.png",
            "annotated_image": f"{sample_id}_annotated.png",
            "question": f"Is item {i} visible?",
            "ground_truth": "Yes" if i % 2 == 0 else "No",
            "complementary_context": f"Item {i} is usually easy to spot.",
            "contradictory_context": f"Item {i} is almost never present.",
            "tags": tags[i % len(tags)] if tags else ["synthetic"],
        })
    manifest = root / "manifest.json"
    manifest.write_text(json.dumps({"version": 1, "samples": samples}, indent=2),
                        encoding="utf-8")
    return manifest


@pytest.fixture
def dataset_path(tmp_path) -> Path:
    return write_dataset(tmp_path / "data")


def _mix(correct: str, wrong: str, n_wrong: int, total: int = 10) -> tuple[str, ...]:
    return tuple(wrong if i < n_wrong else correct for i in range(total))


# Which sample indices answer incorrectly, per configuration. Chosen so that
# accuracy(Q+I+C+) > accuracy(Q+I) > accuracy(Q+I+C-) = accuracy(Q) on ten
# samples, with annotated configurations mirroring the natural ones.
WRONG_INDICES = {
    "Q": lambda i: i % 2 == 1,
    "Q+I": lambda i: i in (3, 8),
    "Q+I+C+": lambda i: i == 7,
    "Q+I+C-": lambda i: i % 2 == 1,
    "Q+IA": lambda i: i in (2, 6),
    "Q+IA+C+": lambda i: i == 5,
    "Q+IA+C-": lambda i: i % 2 == 0,
}

# Natural image draws more attention than the black baseline; annotations
# draw slightly more than the natural image; the image always leads.
ATTENTION_SHARES = {
    "Q": {"image": 0.35, "question": 0.3, "context": 0.0},
    "Q+I": {"image": 0.5, "question": 0.28, "context": 0.18},
    "Q+I+C+": {"image": 0.48, "question": 0.27, "context": 0.2},
    "Q+I+C-": {"image": 0.48, "question": 0.27, "context": 0.2},
    "Q+IA": {"image": 0.56, "question": 0.26, "context": 0.16},
    "Q+IA+C+": {"image": 0.54, "question": 0.25, "context": 0.18},
    "Q+IA+C-": {"image": 0.54, "question": 0.25, "context": 0.18},
}


def build_scenario(manifest_path: Path, model_id: str = "mock-vlm") -> MockScenario:
    """Scripted mock behavior reproducing the qualitative benchmark shape.

    Confidently-wrong answers (silent failures) appear in the no-context and
    complementary configurations; contradictory-context failures carry high
    semantic entropy (sampled answers split 5/5), so their risk area drops.
    """
    payload = json.loads(manifest_path.read_text(encoding="utf-8"))
    entries = {}
    judge_replies = {}
    for i, sample in enumerate(payload["samples"]):
        correct = "Yes." if sample["ground_truth"] == "Yes" else "No."
        wrong = "No." if correct == "Yes." else "Yes."
        for config_id, is_wrong in WRONG_INDICES.items():
            greedy = wrong if is_wrong(i) else correct
            if config_id == "Q":
                samples = _mix(greedy, correct if is_wrong(i) else wrong, 4)
            elif config_id.endswith("C-") and is_wrong(i):
                samples = _mix(wrong, correct, 5)  # loud failure: high entropy
            elif config_id.endswith("C+"):
                samples = _mix(greedy, greedy, 0)  # fully confident
            elif is_wrong(i):
                samples = _mix(wrong, wrong, 0)  # silent failure: zero entropy
            else:
                samples = _mix(correct, wrong, 1)
            reasoning_text = (
                f"{greedy[:-1]}, the depicted scene supports this reading.")
            reasoning_samples = tuple(
                reasoning_text if s == greedy else
                f"{s[:-1]}, on balance the details suggest this instead."
                for s in samples)
            entries[f"{sample['id']}|{config_id}"] = MockEntry(
                answer=MockGeneration(greedy=greedy, samples=samples),
                reasoning=MockGeneration(greedy=reasoning_text,
                                         samples=reasoning_samples),
                attention=ATTENTION_SHARES[config_id],
            )
            judge_replies[f"{sample['id']}|{config_id}"] = (
                "8" if i % 3 else ("9" if config_id.endswith("C+") else "7"))
    return MockScenario(model_id=model_id, entries=entries,
                        judge_default_reply="8", judge_replies=judge_replies)


def write_scenario(manifest_path: Path, path: Path,
                   model_id: str = "mock-vlm") -> Path:
    build_scenario(manifest_path, model_id).write(path)
    return path


def random_span_map(rng: np.random.Generator, task: str,
                    max_prefix: int = 20) -> SpanMap:
    image_len = int(rng.integers(0, 5))
    question_len = int(rng.integers(1, 5))
    has_context = bool(rng.integers(0, 2))
    context_len = int(rng.integers(1, 4)) if has_context else 0
    has_description = bool(rng.integers(0, 2))
    description_len = int(rng.integers(1, 3)) if has_description else 0
    instruction_len = int(rng.integers(0, 3))

    budget = image_len + question_len + context_len + description_len + instruction_len
    if budget > max_prefix:
        instruction_len = 0
        description_len = 0
        has_description = False

    cursor = image_len
    image_span = (0, image_len)
    question_span = (cursor, cursor + question_len)
    cursor += question_len
    context_span = None
    if has_context:
        context_span = (cursor, cursor + context_len)
        cursor += context_len
    description_span = None
    if has_description:
        description_span = (cursor, cursor + description_len)
        cursor += description_len
    n0 = cursor + instruction_len

    if task == "answer":
        return SpanMap(image_span=image_span, question_span=question_span,
                       context_span=context_span, description_span=description_span,
                       n0=n0)
    answer_len = int(rng.integers(1, 4))
    return SpanMap(image_span=image_span, question_span=question_span,
                   context_span=context_span, description_span=description_span,
                   n0=n0, answer_span=(n0, n0 + answer_len),
                   n1=int(rng.integers(0, 3)))


def random_record(rng: np.random.Generator, task: str, index: int = 0,
                  temperature: float = 0.9, n_tokens: int | None = None,
                  text_pool=("Yes", " no", " maybe", ".", " it", " is")) -> GenerationRecord:
    span_map = random_span_map(rng, task)
    from modalbench.traces import prefix_length

    prefix = prefix_length(span_map, task)
    if n_tokens is None:
        n_tokens = int(rng.integers(1, 8))
    tokens = tuple(text_pool[int(rng.integers(0, len(text_pool)))]
                   for _ in range(n_tokens))
    logprobs = tuple(float(-rng.uniform(0.01, 3.0)) for _ in range(n_tokens))
    rows = tuple(
        tuple(float(v) for v in rng.uniform(0.01, 1.0, size=prefix + t))
        for t in range(n_tokens)
    )
    return GenerationRecord(
        task=task,
        output_tokens=tokens,
        token_logprobs=logprobs,
        attention_rows=rows,
        span_map=span_map,
        sampling=Sampling(temperature=temperature if index else 0.0, index=index),
    )


def random_trace(rng: np.random.Generator, task: str | None = None,
                 n_samples: int | None = None) -> InferenceTrace:
    if task is None:
        task = "answer" if rng.integers(0, 2) == 0 else "reasoning"
    if n_samples is None:
        n_samples = int(rng.integers(0, 5))
    greedy = random_record(rng, task, index=0)
    samples = tuple(random_record(rng, task, index=i, temperature=0.9)
                    for i in range(1, n_samples + 1))
    metadata = {
        "adapter": "fixture",
        "adapter_version": "test",
        "question": "Is it there?",
        "temperature": 0.9,
        "nested": {"flag": bool(rng.integers(0, 2)), "value": float(rng.uniform())},
    }
    return InferenceTrace(
        sample_id=f"sample-{int(rng.integers(0, 1000))}",
        config_id="Q+I",
        model_id="fixture-model",
        greedy=greedy,
        samples=samples,
        metadata=metadata,
    )
