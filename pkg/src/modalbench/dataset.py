"""Sample schema, manifest validation, and modality-configuration expansion.

A dataset manifest is UTF-8 JSON with top-level ``{"version": 1, "samples":
[...]}`` and relative image paths; images live alongside the manifest as PNG
or JPEG files. Each sample expands into seven canonical modality
configurations (question only, question+image, plus context and annotated
variants) that are fed to a model adapter as :class:`AssembledInput`.
"""

from __future__ import annotations

import io
import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import InvalidSize, ParseError, ValidationError

MANIFEST_VERSION = 1

CONFIG_IDS = ("Q", "Q+I", "Q+I+C+", "Q+I+C-", "Q+IA", "Q+IA+C+", "Q+IA+C-")

IMAGE_VARIANTS = frozenset({"black", "noise", "natural", "annotated", "none"})
BASELINE_VARIANTS = frozenset({"black", "noise", "none"})
CONTEXT_VARIANTS = frozenset({"none", "complementary", "contradictory"})
PROMPT_STYLES = frozenset({"standard", "context_emphasis"})

DEFAULT_BASELINE_SIZE = (256, 256)

# 8-bit standard deviation for the synthetic noise baseline; recorded in run
# metadata so results stay comparable if it is ever tuned.
NOISE_SIGMA = 25.0

# The answer/reasoning instructions for the standard style are fixed here and
# recorded in every run report. The context-emphasis pair steers the model
# toward the textual context.
ANSWER_PROMPTS = {
    "standard": "Answer the question only with Yes or No.",
    "context_emphasis": (
        "Answer the question only with Yes or No. "
        "Answer based on the context provided in the text."
    ),
}
REASONING_PROMPTS = {
    "standard": "Explain your answer:",
    "context_emphasis": "Explain your answer based on the context provided in the text:",
}


@dataclass(frozen=True)
class ImageRef:
    """Reference to a raster image: a file path or embedded bytes."""

    path: Path | None = None
    data: bytes | None = None

    def __post_init__(self):
        if (self.path is None) == (self.data is None):
            raise ValueError("ImageRef needs exactly one of path or data")

    def load_bytes(self) -> bytes:
        if self.data is not None:
            return self.data
        return Path(self.path).read_bytes()

    def png_bytes(self) -> bytes:
        """Decode and re-encode as RGB PNG (deterministic for fixed pixels)."""
        with Image.open(io.BytesIO(self.load_bytes())) as img:
            return encode_png(np.asarray(img.convert("RGB")))


@dataclass(frozen=True)
class Sample:
    """One dataset item: image pair, closed question, and crafted contexts."""

    id: str
    image: ImageRef
    annotated_image: ImageRef
    question: str
    ground_truth: str  # "Yes" | "No"
    complementary_context: str
    contradictory_context: str
    tags: tuple[str, ...] = ()

    @property
    def truth_is_yes(self) -> bool:
        return self.ground_truth == "Yes"


@dataclass(frozen=True)
class ModalityConfiguration:
    """One input assembly: which image variant and which context go in.

    ``image_description`` and ``prompt_style`` are the attention-rebalancing
    extensions (textual image description, context-emphasis prompt).
    """

    config_id: str
    image_variant: str
    context_variant: str
    image_description: str | None = None
    prompt_style: str = "standard"
    baseline_size_px: tuple[int, int] = DEFAULT_BASELINE_SIZE
    noise_seed: int | None = None

    def __post_init__(self):
        if self.config_id not in CONFIG_IDS:
            raise ValueError(f"unknown config_id {self.config_id!r}")
        if self.image_variant not in IMAGE_VARIANTS:
            raise ValueError(f"unknown image_variant {self.image_variant!r}")
        if self.context_variant not in CONTEXT_VARIANTS:
            raise ValueError(f"unknown context_variant {self.context_variant!r}")
        if self.prompt_style not in PROMPT_STYLES:
            raise ValueError(f"unknown prompt_style {self.prompt_style!r}")

        is_baseline = self.config_id == "Q"
        if is_baseline != (self.image_variant in BASELINE_VARIANTS):
            raise ValueError(
                f"config {self.config_id!r} incompatible with image_variant "
                f"{self.image_variant!r}"
            )
        if is_baseline and self.context_variant != "none":
            raise ValueError("question-only configuration cannot carry context")
        if ("IA" in self.config_id) != (self.image_variant == "annotated"):
            raise ValueError(
                f"config {self.config_id!r} incompatible with image_variant "
                f"{self.image_variant!r}"
            )
        expected_context = "none"
        if "C+" in self.config_id:
            expected_context = "complementary"
        elif "C-" in self.config_id:
            expected_context = "contradictory"
        if self.context_variant != expected_context:
            raise ValueError(
                f"config {self.config_id!r} requires context_variant "
                f"{expected_context!r}, got {self.context_variant!r}"
            )


def configuration_for(config_id: str, *, baseline_variant: str = "black",
                      **overrides) -> ModalityConfiguration:
    """Build the canonical configuration for one of the seven config ids.

    ``baseline_variant`` picks the image stand-in for the question-only
    configuration (black by default; "none" produces degenerate model output
    and is flagged in reports).
    """
    if config_id not in CONFIG_IDS:
        raise ValueError(f"unknown config_id {config_id!r}")
    if config_id == "Q":
        image_variant = baseline_variant
    elif "IA" in config_id:
        image_variant = "annotated"
    else:
        image_variant = "natural"
    if "C+" in config_id:
        context_variant = "complementary"
    elif "C-" in config_id:
        context_variant = "contradictory"
    else:
        context_variant = "none"
    return ModalityConfiguration(
        config_id=config_id,
        image_variant=image_variant,
        context_variant=context_variant,
        **overrides,
    )


def all_configurations(*, baseline_variant: str = "black",
                       prompt_style: str = "standard") -> list[ModalityConfiguration]:
    """The seven canonical configurations, in fixed order."""
    return [
        configuration_for(cid, baseline_variant=baseline_variant,
                          prompt_style=prompt_style)
        for cid in CONFIG_IDS
    ]


@dataclass(frozen=True)
class AssembledInput:
    """The concrete prompt assembly handed to a model adapter.

    ``image_bytes`` is always a PNG; it is ``None`` only for the degenerate
    image_variant = "none" baseline.
    """

    sample_id: str
    config_id: str
    image_bytes: bytes | None
    question_text: str
    context_text: str | None
    description_text: str | None
    answer_prompt: str
    reasoning_prompt: str


def encode_png(pixels: np.ndarray) -> bytes:
    """Encode an HxWx3 uint8 array as PNG bytes."""
    buf = io.BytesIO()
    Image.fromarray(pixels.astype(np.uint8), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def decode_image(data: bytes) -> np.ndarray:
    """Decode image bytes to an HxWx3 uint8 array."""
    with Image.open(io.BytesIO(data)) as img:
        return np.asarray(img.convert("RGB"))


def synthesize_baseline_image(variant: str, size: tuple[int, int] = DEFAULT_BASELINE_SIZE,
                              seed: int | None = None,
                              sigma: float = NOISE_SIGMA) -> tuple[bytes, int | None]:
    """Create the information-free stand-in image for the question-only baseline.

    ``black`` is all (0,0,0) pixels; ``noise`` draws per-channel Gaussian
    values centered on 0, rounds, and clamps to [0,255], so the same seed
    yields bit-identical bytes. Returns ``(png_bytes, seed_used)`` where
    ``seed_used`` is the supplied seed, a freshly drawn one for seedless
    noise, or ``None`` for black.
    """
    width, height = size
    if width < 1 or height < 1:
        raise InvalidSize(f"image size must be positive, got {size}")
    if variant == "black":
        return encode_png(np.zeros((height, width, 3), dtype=np.uint8)), None
    if variant == "noise":
        if seed is None:
            seed = int(np.random.default_rng().integers(0, 2**31 - 1))
        rng = np.random.default_rng(seed)
        values = rng.normal(0.0, sigma, size=(height, width, 3))
        pixels = np.clip(np.rint(values), 0, 255).astype(np.uint8)
        return encode_png(pixels), seed
    raise ValueError(f"unknown baseline variant {variant!r}")


def apply_gaussian_noise(image_bytes: bytes, sigma: float, seed: int) -> bytes:
    """Perturb an existing image with zero-mean Gaussian pixel noise.

    ``sigma = 0`` re-encodes the image unchanged. Used by the interactive
    evaluation endpoint; the batch baseline uses
    :func:`synthesize_baseline_image` instead.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    pixels = decode_image(image_bytes).astype(np.float64)
    if sigma > 0:
        rng = np.random.default_rng(seed)
        pixels = pixels + rng.normal(0.0, sigma, size=pixels.shape)
    return encode_png(np.clip(np.rint(pixels), 0, 255).astype(np.uint8))


def _derived_noise_seed(sample_id: str, config_id: str) -> int:
    # Stable per (sample, config) so expansion stays pure without a seed.
    return zlib.crc32(f"{sample_id}:{config_id}".encode("utf-8"))


def expand(sample: Sample, config: ModalityConfiguration) -> AssembledInput:
    """Assemble the model input for one (sample, configuration) pair.

    Pure and deterministic: a noise baseline without an explicit seed uses a
    seed derived from (sample id, config id).
    """
    if config.image_variant == "natural":
        image_bytes = sample.image.png_bytes()
    elif config.image_variant == "annotated":
        image_bytes = sample.annotated_image.png_bytes()
    elif config.image_variant == "none":
        image_bytes = None
    else:
        seed = config.noise_seed
        if config.image_variant == "noise" and seed is None:
            seed = _derived_noise_seed(sample.id, config.config_id)
        image_bytes, _ = synthesize_baseline_image(
            config.image_variant, config.baseline_size_px, seed
        )

    if config.context_variant == "complementary":
        context_text = sample.complementary_context
    elif config.context_variant == "contradictory":
        context_text = sample.contradictory_context
    else:
        context_text = None

    return AssembledInput(
        sample_id=sample.id,
        config_id=config.config_id,
        image_bytes=image_bytes,
        question_text=sample.question,
        context_text=context_text,
        description_text=config.image_description,
        answer_prompt=ANSWER_PROMPTS[config.prompt_style],
        reasoning_prompt=REASONING_PROMPTS[config.prompt_style],
    )


_REQUIRED_SAMPLE_FIELDS = (
    "id",
    "image",
    "annotated_image",
    "question",
    "ground_truth",
    "complementary_context",
    "contradictory_context",
)
_NONEMPTY_TEXT_FIELDS = ("question", "complementary_context", "contradictory_context")


def _check_image(sample_id: str, fieldname: str, ref: ImageRef) -> None:
    try:
        data = ref.load_bytes()
    except OSError as exc:
        raise ValidationError(sample_id, fieldname, f"unreadable image: {exc}") from exc
    try:
        with Image.open(io.BytesIO(data)) as img:
            img.verify()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ValidationError(sample_id, fieldname, f"not a decodable image: {exc}") from exc


def load_manifest(path: str | Path) -> list[Sample]:
    """Load and validate a dataset manifest.

    Raises :class:`ParseError` for malformed JSON or framing, and
    :class:`ValidationError` (naming the sample id and field) for duplicate
    ids, missing fields, empty texts, or unreadable images.
    """
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"manifest not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"manifest is not valid JSON: {exc}") from exc

    if not isinstance(payload, dict):
        raise ParseError("manifest top level must be an object")
    if payload.get("version") != MANIFEST_VERSION:
        raise ParseError(
            f"unsupported manifest version {payload.get('version')!r}, "
            f"expected {MANIFEST_VERSION}"
        )
    raw_samples = payload.get("samples")
    if not isinstance(raw_samples, list):
        raise ParseError("manifest 'samples' must be a list")

    base_dir = path.parent
    samples: list[Sample] = []
    seen_ids: set[str] = set()
    for position, raw in enumerate(raw_samples):
        if not isinstance(raw, dict):
            raise ParseError(f"samples[{position}] is not an object")
        sample_id = raw.get("id")
        if not isinstance(sample_id, str) or not sample_id:
            raise ValidationError(f"<samples[{position}]>", "id", "missing or empty")
        for fieldname in _REQUIRED_SAMPLE_FIELDS:
            if fieldname not in raw:
                raise ValidationError(sample_id, fieldname, "missing field")
        if sample_id in seen_ids:
            raise ValidationError(sample_id, "id", "duplicate id")
        seen_ids.add(sample_id)
        for fieldname in _NONEMPTY_TEXT_FIELDS:
            value = raw[fieldname]
            if not isinstance(value, str) or not value.strip():
                raise ValidationError(sample_id, fieldname, "must be nonempty text")
        truth = raw["ground_truth"]
        if truth not in ("Yes", "No"):
            raise ValidationError(sample_id, "ground_truth", "must be 'Yes' or 'No'")
        tags = raw.get("tags", [])
        if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
            raise ValidationError(sample_id, "tags", "must be a list of strings")

        refs = {}
        for fieldname in ("image", "annotated_image"):
            rel = raw[fieldname]
            if not isinstance(rel, str) or not rel:
                raise ValidationError(sample_id, fieldname, "must be a relative path")
            ref = ImageRef(path=base_dir / rel)
            _check_image(sample_id, fieldname, ref)
            refs[fieldname] = ref

        samples.append(
            Sample(
                id=sample_id,
                image=refs["image"],
                annotated_image=refs["annotated_image"],
                question=raw["question"],
                ground_truth=truth,
                complementary_context=raw["complementary_context"],
                contradictory_context=raw["contradictory_context"],
                tags=tuple(tags),
            )
        )
    return samples
