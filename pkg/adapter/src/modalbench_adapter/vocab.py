"""Token vocabulary and text handling for the built-in tiny runtime.

Input words map onto the fixed vocabulary by hash (lossy, embedding-only);
generated ids decode back to words. Decoded tokens carry a leading space
after the first token so the engine-side join reproduces the text.
"""

from __future__ import annotations

import zlib

VOCAB: tuple[str, ...] = (
    "Yes", "No", "the", "image", "shows", "a", "clear", "scene", "it", "is",
    "not", "visible", "likely", "unlikely", "object", "color", "there", "here",
    "evidence", "detail", "maybe", "probably", "present", "absent", "bright",
    "dark", "large", "small", "center", "edge", ",", ".",
)

PERIOD_ID = VOCAB.index(".")


def encode_word(word: str) -> int:
    return zlib.crc32(word.encode("utf-8")) % len(VOCAB)


def encode_text(text: str) -> list[int]:
    return [encode_word(w) for w in text.split()]


def decode_tokens(ids: list[int]) -> list[str]:
    tokens = []
    for position, token_id in enumerate(ids):
        word = VOCAB[token_id]
        if position == 0 or word in (",", "."):
            tokens.append(word)
        else:
            tokens.append(" " + word)
    return tokens
