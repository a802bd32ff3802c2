"""Encoder interfaces and the built-in deterministic encoder family.

Pretrained models are invoked as black boxes behind four small protocols:

- ``MultimodalEncoder.embed(image, text)``   -> d_m vector
- ``Captioner.caption(image)``               -> caption string
- ``TextEncoder.encode(text)``               -> d_h vector
- ``SentimentModel`` with ``text_logits(text)`` / ``image_logits(image)``,
  each returning exactly ``k`` logits ordered (negative, neutral, positive).

The "hashing" family implemented here needs no downloads or GPUs: images
are summarized by thumbnail statistics and texts by hashed character
n-grams, both pushed through a fixed seeded random projection. Outputs
are pure functions of (family version, input bytes), which is what makes
two extraction runs byte-identical. Heavyweight pretrained backends live
in :mod:`meme_extractors.pretrained` and plug into the same registry.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np
from PIL import Image

SENTIMENT_CLASSES = ("negative", "neutral", "positive")
FAMILY_VERSION = "hashing-v1"

N_GRAM_BUCKETS = 512
THUMB_SIZE = 16


class EncoderError(RuntimeError):
    """An encoder could not produce output for an input."""


class MultimodalEncoder(Protocol):
    dim: int

    def embed(self, image: Image.Image, text: str) -> np.ndarray: ...


class Captioner(Protocol):
    def caption(self, image: Image.Image) -> str: ...


class TextEncoder(Protocol):
    dim: int

    def encode(self, text: str) -> np.ndarray: ...


class SentimentModel(Protocol):
    k: int

    def text_logits(self, text: str) -> np.ndarray: ...

    def image_logits(self, image: Image.Image) -> np.ndarray: ...


@dataclass
class EncoderSuite:
    """Everything one extraction run needs, resolved from a family name."""

    name: str
    multimodal: MultimodalEncoder
    captioner: Captioner
    text_encoder: TextEncoder
    sentiment: SentimentModel


def _seed_from(*parts: str) -> int:
    digest = hashlib.sha256("|".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def _projection(seed_tag: str, out_dim: int, in_dim: int) -> np.ndarray:
    rng = np.random.default_rng(_seed_from(FAMILY_VERSION, seed_tag))
    return rng.standard_normal((out_dim, in_dim)) / np.sqrt(in_dim)


def _ngram_counts(text: str, buckets: int = N_GRAM_BUCKETS) -> np.ndarray:
    """Signed hashing-trick counts over character trigrams."""
    counts = np.zeros(buckets, dtype=np.float64)
    padded = f"  {text.lower()}  "
    for i in range(len(padded) - 2):
        gram = padded[i : i + 3]
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        value = int.from_bytes(digest, "little")
        sign = 1.0 if value & 1 else -1.0
        counts[(value >> 1) % buckets] += sign
    norm = np.linalg.norm(counts)
    return counts / norm if norm > 0 else counts


def _image_features(image: Image.Image) -> np.ndarray:
    """Thumbnail pixels plus coarse color statistics, unit-normalized."""
    rgb = image.convert("RGB").resize((THUMB_SIZE, THUMB_SIZE), Image.BILINEAR)
    pixels = np.asarray(rgb, dtype=np.float64) / 255.0
    gray = pixels.mean(axis=2).ravel()
    channel_means = pixels.mean(axis=(0, 1))
    channel_stds = pixels.std(axis=(0, 1))
    feats = np.concatenate([gray - 0.5, channel_means - 0.5, channel_stds])
    norm = np.linalg.norm(feats)
    return feats / norm if norm > 0 else feats


class HashingMultimodalEncoder:
    """Joint image+text embedding from projected thumbnail and n-gram features."""

    def __init__(self, dim: int = 768):
        self.dim = dim
        in_dim = THUMB_SIZE * THUMB_SIZE + 6 + N_GRAM_BUCKETS
        self._proj = _projection(f"mm/{dim}", dim, in_dim)

    def embed(self, image: Image.Image, text: str) -> np.ndarray:
        feats = np.concatenate([_image_features(image), _ngram_counts(text)])
        return np.tanh(self._proj @ feats)


class HashingTextEncoder:
    """Text embedding from projected hashed n-grams."""

    def __init__(self, dim: int = 768):
        self.dim = dim
        self._proj = _projection(f"text/{dim}", dim, N_GRAM_BUCKETS)

    def encode(self, text: str) -> np.ndarray:
        return np.tanh(self._proj @ _ngram_counts(text))


class TemplateCaptioner:
    """Describes an image from its pixel statistics, deterministically."""

    _TONES = ("red", "green", "blue")

    def caption(self, image: Image.Image) -> str:
        rgb = image.convert("RGB").resize((THUMB_SIZE, THUMB_SIZE), Image.BILINEAR)
        pixels = np.asarray(rgb, dtype=np.float64) / 255.0
        brightness = pixels.mean()
        tone = self._TONES[int(np.argmax(pixels.mean(axis=(0, 1))))]
        texture = pixels.std()
        level = "bright" if brightness > 0.6 else ("dark" if brightness < 0.3 else "muted")
        busy = "busy" if texture > 0.25 else "plain"
        return f"a {level} {busy} image dominated by {tone} tones"


_POSITIVE_WORDS = frozenset(
    "good great wonderful happy love lovely beautiful best amazing joy cute "
    "nice awesome delightful bright friendly kind sweet".split()
)
_NEGATIVE_WORDS = frozenset(
    "bad hate hateful awful terrible ugly worst disgusting kill attack stupid "
    "horrible sad angry dark evil nasty cruel".split()
)


class LexiconTextSentiment:
    """Word-list text sentiment producing (negative, neutral, positive) logits."""

    k = 3

    def text_logits(self, text: str) -> np.ndarray:
        words = [w.strip(".,!?;:'\"") for w in text.lower().split()]
        pos = sum(w in _POSITIVE_WORDS for w in words)
        neg = sum(w in _NEGATIVE_WORDS for w in words)
        neutral = 0.5 + 0.1 * max(len(words) - pos - neg, 0)
        return np.array([float(neg), min(neutral, 1.5), float(pos)])

    def image_logits(self, image: Image.Image) -> np.ndarray:
        raise EncoderError("lexicon sentiment handles text only")


class BrightnessVisualSentiment:
    """Heuristic visual sentiment: bright saturated images read as positive."""

    k = 3

    def text_logits(self, text: str) -> np.ndarray:
        raise EncoderError("visual sentiment handles images only")

    def image_logits(self, image: Image.Image) -> np.ndarray:
        rgb = image.convert("RGB").resize((THUMB_SIZE, THUMB_SIZE), Image.BILINEAR)
        pixels = np.asarray(rgb, dtype=np.float64) / 255.0
        brightness = pixels.mean()
        saturation = (pixels.max(axis=2) - pixels.min(axis=2)).mean()
        pos = 2.0 * brightness + saturation
        neg = 2.0 * (1.0 - brightness)
        return np.array([neg, 1.0, pos])


class SplitSentiment:
    """Pairs a text-only and an image-only model behind one interface."""

    def __init__(self, text_model, image_model):
        if text_model.k != 3 or image_model.k != 3:
            raise EncoderError(
                "sentiment models must emit exactly 3 logits (negative, neutral, "
                "positive); remap the model's classes to this order"
            )
        self.k = 3
        self._text = text_model
        self._image = image_model

    def text_logits(self, text: str) -> np.ndarray:
        return self._check(self._text.text_logits(text))

    def image_logits(self, image: Image.Image) -> np.ndarray:
        return self._check(self._image.image_logits(image))

    def _check(self, logits: np.ndarray) -> np.ndarray:
        logits = np.asarray(logits, dtype=np.float64)
        if logits.shape != (3,):
            raise EncoderError(
                f"sentiment model emitted {logits.shape} logits, expected (3,); "
                "remap the model's classes to (negative, neutral, positive)"
            )
        return logits


def _build_hashing(dim: int) -> EncoderSuite:
    return EncoderSuite(
        name="hashing",
        multimodal=HashingMultimodalEncoder(dim=dim),
        captioner=TemplateCaptioner(),
        text_encoder=HashingTextEncoder(dim=dim),
        sentiment=SplitSentiment(LexiconTextSentiment(), BrightnessVisualSentiment()),
    )


def _build_pretrained(dim: int) -> EncoderSuite:
    from . import pretrained

    return pretrained.build_suite()


FAMILIES: dict[str, Callable[[int], EncoderSuite]] = {
    "hashing": _build_hashing,
    "pretrained": _build_pretrained,
}


def build_suite(family: str, dim: int = 768) -> EncoderSuite:
    if family not in FAMILIES:
        raise EncoderError(f"unknown encoder family '{family}' (choose from {sorted(FAMILIES)})")
    return FAMILIES[family](dim)
