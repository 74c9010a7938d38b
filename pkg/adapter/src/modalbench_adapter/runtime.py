"""Built-in tiny decoder runtime with real softmax-attention capture.

A small randomly initialized (seeded, so fully deterministic) decoder-only
transformer stands in for a GPU-scale vision-language model: image bytes
become grid-pooled patch embeddings whose count scales with resolution, text
words hash onto a fixed vocabulary, and generation records the final
attention row (averaged over layers and heads) plus the chosen token's
log-likelihood at every step. The capture path — softmax rows over preceding
positions, layer/head mean, span bookkeeping — is exactly what a checkpoint-
backed runtime feeds through; only the weights are toy.
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from .vocab import PERIOD_ID, VOCAB, decode_tokens, encode_text

ATTENTION_AGGREGATION = "mean_layers_heads_v1"


def stable_seed(*parts) -> int:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2**62)


@dataclass
class TinyConfig:
    dim: int = 32
    n_layers: int = 2
    n_heads: int = 2
    max_seq: int = 640
    weight_seed: int = 20240811
    max_answer_tokens: int = 6
    max_reasoning_tokens: int = 12
    patch_px: int = 64
    min_grid: int = 2
    max_grid: int = 8


@dataclass
class GenerationOutput:
    tokens: list[str]
    logprobs: list[float]
    attention_rows: list[list[float]]


@dataclass
class PromptLayout:
    ids_or_embeds: list  # per position: int token id or np patch vector
    image_span: tuple[int, int]
    question_span: tuple[int, int]
    context_span: tuple[int, int] | None
    description_span: tuple[int, int] | None
    n0: int
    answer_span: tuple[int, int] | None = None
    n1: int | None = None
    answer_token_ids: list[int] = field(default_factory=list)


class TinyRuntime:
    """Deterministic toy VLM with per-step attention row capture."""

    model_id = "tiny-attn-v1"
    quantization = "float32"

    def __init__(self, config: TinyConfig | None = None):
        self.config = config or TinyConfig()
        c = self.config
        generator = torch.Generator().manual_seed(c.weight_seed)

        def weights(*shape):
            return torch.randn(*shape, generator=generator) / math.sqrt(shape[-1])

        self.token_embedding = weights(len(VOCAB), c.dim)
        self.position_embedding = weights(c.max_seq, c.dim)
        self.image_projection = weights(3, c.dim)
        self.layers = []
        for _ in range(c.n_layers):
            self.layers.append({
                "wq": weights(c.dim, c.dim),
                "wk": weights(c.dim, c.dim),
                "wv": weights(c.dim, c.dim),
                "wo": weights(c.dim, c.dim),
                "w1": weights(c.dim, 2 * c.dim),
                "w2": weights(2 * c.dim, c.dim),
            })
        self.lm_head = weights(c.dim, len(VOCAB))

    # -- input encoding ----------------------------------------------------

    def image_grid(self, width: int, height: int) -> tuple[int, int]:
        c = self.config
        gw = max(c.min_grid, min(c.max_grid, round(width / c.patch_px)))
        gh = max(c.min_grid, min(c.max_grid, round(height / c.patch_px)))
        return gw, gh

    def image_token_count(self, width: int, height: int) -> int:
        gw, gh = self.image_grid(width, height)
        return gw * gh

    def image_patches(self, image_bytes: bytes) -> np.ndarray:
        with Image.open(io.BytesIO(image_bytes)) as img:
            pixels = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
        height, width = pixels.shape[:2]
        gw, gh = self.image_grid(width, height)
        rows = np.array_split(pixels, gh, axis=0)
        patches = []
        for row in rows:
            for cell in np.array_split(row, gw, axis=1):
                patches.append(cell.reshape(-1, 3).mean(axis=0))
        return np.asarray(patches)  # (gw*gh, 3)

    def layout_prompt(self, payload, task: str,
                      answer_token_ids: list[int] | None = None) -> PromptLayout:
        positions: list = []

        image_bytes = payload.image_bytes
        if image_bytes is not None:
            for patch in self.image_patches(image_bytes):
                positions.append(patch)
        image_span = (0, len(positions))

        question_ids = encode_text(payload.question_text)
        question_span = (len(positions), len(positions) + len(question_ids))
        positions.extend(question_ids)

        context_span = None
        if payload.context_text is not None:
            ids = encode_text(payload.context_text)
            context_span = (len(positions), len(positions) + len(ids))
            positions.extend(ids)

        description_span = None
        if payload.description_text is not None:
            ids = encode_text(payload.description_text)
            description_span = (len(positions), len(positions) + len(ids))
            positions.extend(ids)

        positions.extend(encode_text(payload.answer_prompt))
        n0 = len(positions)

        layout = PromptLayout(
            ids_or_embeds=positions,
            image_span=image_span,
            question_span=question_span,
            context_span=context_span,
            description_span=description_span,
            n0=n0,
        )
        if task == "reasoning":
            answer_ids = answer_token_ids or []
            layout.answer_span = (n0, n0 + len(answer_ids))
            positions.extend(answer_ids)
            second_prompt = encode_text(payload.reasoning_prompt)
            layout.n1 = len(second_prompt)
            positions.extend(second_prompt)
            layout.answer_token_ids = answer_ids
        return layout

    # -- model -------------------------------------------------------------

    def _embed(self, positions: list) -> torch.Tensor:
        vectors = []
        for item in positions:
            if isinstance(item, (int, np.integer)):
                vectors.append(self.token_embedding[int(item)])
            else:
                vectors.append(torch.as_tensor(item, dtype=torch.float32)
                               @ self.image_projection)
        stacked = torch.stack(vectors)
        return stacked + self.position_embedding[: len(vectors)]

    def _forward(self, embeddings: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns (logits over vocab for the last position, mean attention
        row of the last position over all preceding tokens)."""
        c = self.config
        seq_len = embeddings.shape[0]
        head_dim = c.dim // c.n_heads
        mask = torch.triu(torch.full((seq_len, seq_len), float("-inf")), diagonal=1)
        x = embeddings
        last_rows = []
        for layer in self.layers:
            normed = F.layer_norm(x, (c.dim,))
            q = (normed @ layer["wq"]).view(seq_len, c.n_heads, head_dim).transpose(0, 1)
            k = (normed @ layer["wk"]).view(seq_len, c.n_heads, head_dim).transpose(0, 1)
            v = (normed @ layer["wv"]).view(seq_len, c.n_heads, head_dim).transpose(0, 1)
            scores = q @ k.transpose(-2, -1) / math.sqrt(head_dim) + mask
            attn = torch.softmax(scores, dim=-1)  # (H, T, T)
            last_rows.append(attn[:, -1, :])
            x = x + (attn @ v).transpose(0, 1).reshape(seq_len, c.dim) @ layer["wo"]
            x = x + F.gelu(F.layer_norm(x, (c.dim,)) @ layer["w1"]) @ layer["w2"]
        logits = F.layer_norm(x[-1], (c.dim,)) @ self.lm_head
        # (layers, heads, T) -> (T,): arithmetic mean over layers and heads.
        mean_row = torch.stack(last_rows).mean(dim=(0, 1))
        return logits, mean_row

    def _generate_ids(self, positions: list, max_new: int, temperature: float,
                      seed: int) -> tuple[GenerationOutput, list[int]]:
        generator = torch.Generator().manual_seed(seed)
        token_ids: list[int] = []
        logprobs: list[float] = []
        rows: list[list[float]] = []
        working = list(positions)
        with torch.no_grad():
            for step in range(max_new):
                embeddings = self._embed(working)
                logits, row = self._forward(embeddings)
                logp = F.log_softmax(logits, dim=-1)
                if temperature <= 0:
                    next_id = int(torch.argmax(logits))
                else:
                    probs = torch.softmax(logits / temperature, dim=-1)
                    next_id = int(torch.multinomial(probs, 1, generator=generator))
                token_ids.append(next_id)
                logprobs.append(min(float(logp[next_id]), 0.0))
                rows.append([max(float(v), 0.0) for v in row])
                working.append(next_id)
                if next_id == PERIOD_ID and step >= 1:
                    break
        return GenerationOutput(tokens=decode_tokens(token_ids),
                                logprobs=logprobs, attention_rows=rows), token_ids

    # -- trace production ----------------------------------------------------

    def _span_map_dict(self, layout: PromptLayout, task: str) -> dict:
        span_map = {
            "image_span": list(layout.image_span),
            "question_span": list(layout.question_span),
        }
        if layout.context_span is not None:
            span_map["context_span"] = list(layout.context_span)
        if layout.description_span is not None:
            span_map["description_span"] = list(layout.description_span)
        if task == "reasoning":
            span_map["answer_span"] = list(layout.answer_span)
        span_map["n0"] = layout.n0
        if task == "reasoning":
            span_map["n1"] = layout.n1
        return span_map

    def generate_trace(self, payload, task: str, n_samples: int,
                       temperature: float, seed: int) -> dict:
        """One engine-conformant trace dict (the `.traces.jsonl` line shape)."""
        c = self.config
        if not payload.question_text.strip():
            raise ValueError("question_text must be nonempty")
        max_new = c.max_answer_tokens if task == "answer" else c.max_reasoning_tokens

        answer_ids: list[int] | None = None
        if task == "reasoning":
            answer_layout = self.layout_prompt(payload, "answer")
            _, answer_ids = self._generate_ids(
                answer_layout.ids_or_embeds, c.max_answer_tokens, 0.0, 0)
        layout = self.layout_prompt(payload, task, answer_ids)
        span_map = self._span_map_dict(layout, task)

        def record(output: GenerationOutput, temp: float, index: int) -> dict:
            return {
                "task": task,
                "output_tokens": output.tokens,
                "token_logprobs": output.logprobs,
                "attention_rows": output.attention_rows,
                "span_map": span_map,
                "sampling": {"temperature": float(temp), "index": index},
            }

        greedy_output, _ = self._generate_ids(layout.ids_or_embeds, max_new, 0.0, 0)
        samples = []
        for i in range(n_samples):
            sample_seed = stable_seed(seed, payload.sample_id, payload.config_id,
                                      task, i)
            output, _ = self._generate_ids(layout.ids_or_embeds, max_new,
                                           temperature, sample_seed)
            samples.append(record(output, temperature, i))

        return {
            "trace_version": 1,
            "sample_id": payload.sample_id,
            "config_id": payload.config_id,
            "model_id": self.model_id,
            "greedy": record(greedy_output, 0.0, 0),
            "samples": samples,
            "metadata": {
                "adapter": "tiny-runtime",
                "adapter_version": "1",
                "attention_aggregation": ATTENTION_AGGREGATION,
                "quantization": self.quantization,
                "question": payload.question_text,
                "context": payload.context_text,
                "description": payload.description_text,
                "answer_prompt": payload.answer_prompt,
                "reasoning_prompt": payload.reasoning_prompt,
                "temperature": float(temperature),
                "n_samples": n_samples,
                "seed": seed,
            },
        }
