"""Encoder family behavior: determinism, sentiment spot checks, k=3 contract."""

import numpy as np
import pytest
from PIL import Image

from meme_extractors.encoders import (
    BrightnessVisualSentiment,
    EncoderError,
    HashingMultimodalEncoder,
    HashingTextEncoder,
    LexiconTextSentiment,
    SplitSentiment,
    TemplateCaptioner,
    build_suite,
)

POSITIVE_CLASS = 2  # (negative, neutral, positive)
NEGATIVE_CLASS = 0


def gradient_image(seed=0, size=32):
    rng = np.random.default_rng(seed)
    base = rng.integers(30, 226, size=3)
    pixels = np.zeros((size, size, 3), dtype=np.uint8)
    for c in range(3):
        pixels[:, :, c] = np.linspace(0, base[c], size, dtype=np.uint8)[:, None]
    return Image.fromarray(pixels)


class TestHashingEncoders:
    def test_multimodal_shape_and_determinism(self):
        enc = HashingMultimodalEncoder(dim=96)
        img = gradient_image(1)
        a = enc.embed(img, "some overlay text")
        b = HashingMultimodalEncoder(dim=96).embed(gradient_image(1), "some overlay text")
        assert a.shape == (96,)
        np.testing.assert_array_equal(a, b)

    def test_text_changes_embedding(self):
        enc = HashingMultimodalEncoder(dim=64)
        img = gradient_image(2)
        assert not np.array_equal(enc.embed(img, "one"), enc.embed(img, "two"))

    def test_text_encoder_deterministic_and_text_sensitive(self):
        enc = HashingTextEncoder(dim=48)
        np.testing.assert_array_equal(enc.encode("hello"), enc.encode("hello"))
        assert not np.array_equal(enc.encode("hello"), enc.encode("goodbye"))

    def test_empty_text_allowed(self):
        assert np.all(np.isfinite(HashingTextEncoder(dim=16).encode("")))


class TestCaptioner:
    def test_caption_is_deterministic_text(self):
        cap = TemplateCaptioner()
        img = gradient_image(3)
        assert cap.caption(img) == cap.caption(img)
        assert isinstance(cap.caption(img), str) and len(cap.caption(img)) > 0

    def test_caption_reflects_brightness(self):
        cap = TemplateCaptioner()
        dark = Image.new("RGB", (16, 16), (10, 10, 10))
        bright = Image.new("RGB", (16, 16), (240, 240, 240))
        assert "dark" in cap.caption(dark)
        assert "bright" in cap.caption(bright)


class TestSentiment:
    def test_clearly_positive_caption_argmax_positive(self):
        model = LexiconTextSentiment()
        logits = model.text_logits("what a wonderful happy beautiful day, I love it")
        assert int(np.argmax(logits)) == POSITIVE_CLASS

    def test_clearly_negative_text_argmax_negative(self):
        model = LexiconTextSentiment()
        logits = model.text_logits("this is awful hateful disgusting and ugly")
        assert int(np.argmax(logits)) == NEGATIVE_CLASS

    def test_neutral_text_argmax_neutral(self):
        logits = LexiconTextSentiment().text_logits("the meeting is on tuesday")
        assert int(np.argmax(logits)) == 1

    def test_visual_sentiment_brightness_ordering(self):
        model = BrightnessVisualSentiment()
        dark = model.image_logits(Image.new("RGB", (8, 8), (5, 5, 5)))
        bright = model.image_logits(Image.new("RGB", (8, 8), (250, 220, 30)))
        assert bright[POSITIVE_CLASS] > dark[POSITIVE_CLASS]
        assert dark[NEGATIVE_CLASS] > bright[NEGATIVE_CLASS]

    def test_wrong_class_count_rejected_with_remap_hint(self):
        class TwoClass:
            k = 2

            def text_logits(self, text):
                return np.zeros(2)

            def image_logits(self, image):
                return np.zeros(2)

        with pytest.raises(EncoderError, match="remap"):
            SplitSentiment(TwoClass(), BrightnessVisualSentiment())

    def test_wrong_logit_shape_at_runtime_rejected(self):
        class LyingModel:
            k = 3

            def text_logits(self, text):
                return np.zeros(5)

            def image_logits(self, image):
                return np.zeros(3)

        model = SplitSentiment(LyingModel(), BrightnessVisualSentiment())
        with pytest.raises(EncoderError, match="remap"):
            model.text_logits("hello")


class TestRegistry:
    def test_hashing_family_builds(self):
        suite = build_suite("hashing", dim=32)
        assert suite.multimodal.dim == 32
        assert suite.sentiment.k == 3

    def test_unknown_family_rejected(self):
        with pytest.raises(EncoderError, match="family"):
            build_suite("quantum")

    def test_pretrained_family_requires_local_checkpoints(self, monkeypatch):
        monkeypatch.delenv("MEMEFUSE_MM_MODEL", raising=False)
        with pytest.raises(EncoderError, match="MEMEFUSE_MM_MODEL"):
            build_suite("pretrained")
