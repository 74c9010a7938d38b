"""Entailment backends for the /entail endpoint.

The checkpoint-backed backend loads a sequence-classification NLI model when
one is configured and loadable; environments without model weights fall back
to a deterministic lexical backend so the endpoint keeps its contract.
"""

from __future__ import annotations

import logging
import string

logger = logging.getLogger(__name__)

LABELS = ("entails", "neutral", "contradicts")


def _normalize(text: str) -> list[str]:
    cleaned = text.casefold().translate(str.maketrans("", "", string.punctuation))
    return cleaned.split()


class LexicalEntailment:
    """Deterministic rule-based entailment for checkpoint-free environments.

    Mutual containment or equality entails; opposite leading verdicts
    (yes/no) contradict; everything else is neutral.
    """

    backend_id = "lexical-v1"

    def judge(self, premise: str, hypothesis: str) -> str:
        p_words = _normalize(premise)
        h_words = _normalize(hypothesis)
        if p_words == h_words:
            return "entails"
        p_verdicts = {w for w in p_words if w in ("yes", "no")}
        h_verdicts = {w for w in h_words if w in ("yes", "no")}
        if p_verdicts and h_verdicts and not (p_verdicts & h_verdicts):
            return "contradicts"
        if h_words and set(h_words) <= set(p_words):
            return "entails"
        return "neutral"


class CheckpointEntailment:
    """NLI via a transformers sequence-classification checkpoint."""

    def __init__(self, checkpoint: str, device: str = "cpu"):
        from transformers import (  # deferred: heavy import, optional backend
            AutoModelForSequenceClassification,
            AutoTokenizer,
        )

        self.backend_id = checkpoint
        self._tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self._model = AutoModelForSequenceClassification.from_pretrained(checkpoint)
        self._model.eval().to(device)
        self._device = device
        labels = {i: str(v).lower()
                  for i, v in self._model.config.id2label.items()}
        self._label_map = {}
        for index, name in labels.items():
            if "entail" in name:
                self._label_map[index] = "entails"
            elif "contra" in name:
                self._label_map[index] = "contradicts"
            else:
                self._label_map[index] = "neutral"

    def judge(self, premise: str, hypothesis: str) -> str:
        import torch

        inputs = self._tokenizer(premise, hypothesis, return_tensors="pt",
                                 truncation=True).to(self._device)
        with torch.no_grad():
            logits = self._model(**inputs).logits[0]
        return self._label_map[int(logits.argmax())]


def build_backend(checkpoint: str | None):
    """Checkpoint backend when available, lexical fallback otherwise."""
    if checkpoint:
        try:
            return CheckpointEntailment(checkpoint)
        except Exception as exc:  # missing weights, no hub access, bad id
            logger.warning("cannot load NLI checkpoint %r (%s); "
                           "falling back to lexical entailment", checkpoint, exc)
    return LexicalEntailment()
