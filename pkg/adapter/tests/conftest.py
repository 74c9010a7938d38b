from __future__ import annotations

import io

import numpy as np
import pytest
from PIL import Image

from modalbench_adapter.runtime import TinyRuntime
from modalbench_adapter.server import GenerationInput


def png_bytes(width: int, height: int, color=(30, 60, 90)) -> bytes:
    array = np.zeros((height, width, 3), dtype=np.uint8)
    array[:, :] = color
    buffer = io.BytesIO()
    Image.fromarray(array, mode="RGB").save(buffer, format="PNG")
    return buffer.getvalue()


def generation_input(sample_id="s1", config_id="Q+I", image=True,
                     context=None, description=None) -> GenerationInput:
    return GenerationInput(
        sample_id=sample_id,
        config_id=config_id,
        image_bytes=png_bytes(256, 256) if image else None,
        question_text="Is the object visible in the scene?",
        context_text=context,
        description_text=description,
        answer_prompt="Answer the question only with Yes or No.",
        reasoning_prompt="Explain your answer:",
    )


@pytest.fixture(scope="session")
def runtime() -> TinyRuntime:
    return TinyRuntime()
