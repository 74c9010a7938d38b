from __future__ import annotations

import json

import numpy as np
import pytest

from modalbench.dataset import (
    ANSWER_PROMPTS,
    CONFIG_IDS,
    REASONING_PROMPTS,
    ModalityConfiguration,
    all_configurations,
    apply_gaussian_noise,
    configuration_for,
    decode_image,
    expand,
    load_manifest,
    synthesize_baseline_image,
)
from modalbench.errors import InvalidSize, ParseError, ValidationError

from conftest import write_dataset, write_image


class TestManifest:
    def test_round_trip_two_samples(self, dataset_path):
        samples = load_manifest(dataset_path)
        assert len(samples) == 2
        assert samples[0].id == "s000"
        assert samples[0].truth_is_yes
        assert not samples[1].truth_is_yes

    def test_duplicate_id_rejected(self, tmp_path):
        manifest = write_dataset(tmp_path / "d")
        payload = json.loads(manifest.read_text())
        payload["samples"][1]["id"] = "boiling"
        payload["samples"].append(dict(payload["samples"][1]))
        manifest.write_text(json.dumps(payload))
        with pytest.raises(ValidationError) as excinfo:
            load_manifest(manifest)
        assert excinfo.value.item_id == "boiling"
        assert excinfo.value.field == "id"

    def test_hundred_samples_with_domain_tags(self, tmp_path):
        tags = [["geography"], ["history"], ["art and design"], ["sport"], ["biology"]]
        manifest = write_dataset(tmp_path / "d", n_samples=100, tags=tags)
        samples = load_manifest(manifest)
        assert len(samples) == 100
        assert {t for s in samples for t in s.tags} == {
            "geography", "history", "art and design", "sport", "biology"}

    @pytest.mark.parametrize("missing", [
        "question", "ground_truth", "complementary_context",
        "contradictory_context", "image", "annotated_image",
    ])
    def test_missing_field_names_sample_and_field(self, tmp_path, missing):
        manifest = write_dataset(tmp_path / "d")
        payload = json.loads(manifest.read_text())
        del payload["samples"][0][missing]
        manifest.write_text(json.dumps(payload))
        with pytest.raises(ValidationError) as excinfo:
            load_manifest(manifest)
        assert excinfo.value.item_id == "s000"
        assert excinfo.value.field == missing

    def test_empty_context_rejected(self, tmp_path):
        manifest = write_dataset(tmp_path / "d")
        payload = json.loads(manifest.read_text())
        payload["samples"][0]["contradictory_context"] = "   "
        manifest.write_text(json.dumps(payload))
        with pytest.raises(ValidationError) as excinfo:
            load_manifest(manifest)
        assert excinfo.value.field == "contradictory_context"

    def test_unreadable_image_rejected(self, tmp_path):
        manifest = write_dataset(tmp_path / "d")
        (tmp_path / "d" / "s000.png").write_bytes(b"not an image at all")
        with pytest.raises(ValidationError) as excinfo:
            load_manifest(manifest)
        assert excinfo.value.field == "image"

    def test_bad_ground_truth_rejected(self, tmp_path):
        manifest = write_dataset(tmp_path / "d")
        payload = json.loads(manifest.read_text())
        payload["samples"][0]["ground_truth"] = "maybe"
        manifest.write_text(json.dumps(payload))
        with pytest.raises(ValidationError):
            load_manifest(manifest)

    def test_malformed_json_is_parse_error(self, tmp_path):
        bad = tmp_path / "broken.json"
        bad.write_text("{not json")
        with pytest.raises(ParseError):
            load_manifest(bad)

    def test_wrong_version_is_parse_error(self, tmp_path):
        bad = tmp_path / "v2.json"
        bad.write_text(json.dumps({"version": 2, "samples": []}))
        with pytest.raises(ParseError):
            load_manifest(bad)

    def test_missing_file_is_parse_error(self, tmp_path):
        with pytest.raises(ParseError):
            load_manifest(tmp_path / "nope.json")


class TestBaselineImages:
    def test_black_is_all_zero(self):
        png, seed = synthesize_baseline_image("black", (256, 256))
        pixels = decode_image(png)
        assert pixels.shape == (256, 256, 3)
        assert (pixels == 0).all()
        assert seed is None

    def test_noise_deterministic_per_seed(self):
        one, _ = synthesize_baseline_image("noise", (256, 256), seed=7)
        two, _ = synthesize_baseline_image("noise", (256, 256), seed=7)
        assert one == two
        other, _ = synthesize_baseline_image("noise", (256, 256), seed=8)
        assert other != one

    def test_noise_draws_and_reports_seed_when_absent(self):
        png, seed = synthesize_baseline_image("noise", (8, 8))
        assert seed is not None
        again, _ = synthesize_baseline_image("noise", (8, 8), seed=seed)
        assert png == again

    def test_noise_mean_matches_frozen_value(self):
        # Clamped half-Gaussian at mean 0: frozen from the chosen RNG and sigma.
        png, _ = synthesize_baseline_image("noise", (4, 4), seed=1)
        pixels = decode_image(png)
        assert pixels.mean() == pytest.approx(7.25)
        assert 0 <= pixels.mean() <= 40

    @pytest.mark.parametrize("size", [(0, 10), (10, 0), (-1, 5)])
    def test_invalid_size(self, size):
        with pytest.raises(InvalidSize):
            synthesize_baseline_image("black", size)

    def test_apply_noise_zero_sigma_keeps_pixels(self):
        base, _ = synthesize_baseline_image("noise", (6, 6), seed=3)
        out = apply_gaussian_noise(base, 0.0, seed=9)
        assert (decode_image(out) == decode_image(base)).all()

    def test_apply_noise_deterministic(self):
        base, _ = synthesize_baseline_image("black", (6, 6))
        assert apply_gaussian_noise(base, 10.0, 4) == apply_gaussian_noise(base, 10.0, 4)
        assert apply_gaussian_noise(base, 10.0, 4) != apply_gaussian_noise(base, 10.0, 5)


class TestConfigurations:
    def test_exactly_seven_config_ids(self):
        assert len(CONFIG_IDS) == 7
        assert len(set(CONFIG_IDS)) == 7

    def test_canonical_variants(self):
        variants = {c.config_id: (c.image_variant, c.context_variant)
                    for c in all_configurations()}
        assert variants == {
            "Q": ("black", "none"),
            "Q+I": ("natural", "none"),
            "Q+I+C+": ("natural", "complementary"),
            "Q+I+C-": ("natural", "contradictory"),
            "Q+IA": ("annotated", "none"),
            "Q+IA+C+": ("annotated", "complementary"),
            "Q+IA+C-": ("annotated", "contradictory"),
        }

    @pytest.mark.parametrize("kwargs", [
        dict(config_id="Q", image_variant="natural", context_variant="none"),
        dict(config_id="Q", image_variant="black", context_variant="complementary"),
        dict(config_id="Q+I", image_variant="annotated", context_variant="none"),
        dict(config_id="Q+IA", image_variant="natural", context_variant="none"),
        dict(config_id="Q+I+C+", image_variant="natural", context_variant="contradictory"),
        dict(config_id="Q+I+C-", image_variant="natural", context_variant="none"),
        dict(config_id="Q+X", image_variant="natural", context_variant="none"),
    ])
    def test_inconsistent_configuration_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ModalityConfiguration(**kwargs)


class TestExpand:
    def test_contradictory_context_with_natural_image(self, dataset_path):
        sample = load_manifest(dataset_path)[0]
        assembled = expand(sample, configuration_for("Q+I+C-"))
        assert assembled.context_text == sample.contradictory_context
        assert assembled.image_bytes == sample.image.png_bytes()
        assert assembled.description_text is None

    def test_question_only_carries_black_image(self, dataset_path):
        sample = load_manifest(dataset_path)[0]
        assembled = expand(sample, configuration_for("Q"))
        expected, _ = synthesize_baseline_image("black", (256, 256))
        assert assembled.image_bytes == expected
        assert assembled.context_text is None

    def test_annotated_with_description_and_complement(self, dataset_path):
        sample = load_manifest(dataset_path)[0]
        config = configuration_for("Q+IA+C+", image_description="A small scene.")
        assembled = expand(sample, config)
        assert assembled.image_bytes == sample.annotated_image.png_bytes()
        assert assembled.context_text == sample.complementary_context
        assert assembled.description_text == "A small scene."

    def test_image_variant_none_has_no_image(self, dataset_path):
        sample = load_manifest(dataset_path)[0]
        assembled = expand(sample, configuration_for("Q", baseline_variant="none"))
        assert assembled.image_bytes is None

    def test_expand_is_pure(self, dataset_path):
        sample = load_manifest(dataset_path)[0]
        config = configuration_for("Q", baseline_variant="noise")
        assert expand(sample, config) == expand(sample, config)

    def test_noise_baseline_stable_without_seed_varies_across_samples(self, dataset_path):
        samples = load_manifest(dataset_path)
        config = configuration_for("Q", baseline_variant="noise")
        first = expand(samples[0], config).image_bytes
        second = expand(samples[1], config).image_bytes
        assert first != second
        assert expand(samples[0], config).image_bytes == first

    def test_seven_distinct_variant_pairs(self, dataset_path):
        sample = load_manifest(dataset_path)[0]
        pairs = set()
        for config in all_configurations():
            assembled = expand(sample, config)
            pairs.add((config.image_variant, config.context_variant,
                       assembled.context_text))
        assert len(pairs) == 7

    def test_prompt_styles(self, dataset_path):
        sample = load_manifest(dataset_path)[0]
        standard = expand(sample, configuration_for("Q+I"))
        assert standard.answer_prompt == ANSWER_PROMPTS["standard"]
        emphasized = expand(sample, configuration_for("Q+I+C+",
                                                      prompt_style="context_emphasis"))
        assert emphasized.answer_prompt == (
            "Answer the question only with Yes or No. "
            "Answer based on the context provided in the text.")
        assert emphasized.reasoning_prompt == (
            "Explain your answer based on the context provided in the text:")
        assert standard.reasoning_prompt == REASONING_PROMPTS["standard"]

    def test_image_bytes_are_png(self, dataset_path):
        sample = load_manifest(dataset_path)[0]
        for config in all_configurations():
            data = expand(sample, config).image_bytes
            assert data.startswith(b"\x89PNG")


def test_write_image_helper_round_trips(tmp_path):
    path = write_image(tmp_path / "img.png", color=(1, 2, 3), size=(5, 4))
    pixels = decode_image(path.read_bytes())
    assert pixels.shape == (4, 5, 3)
    assert (pixels == np.array([1, 2, 3])).all()
