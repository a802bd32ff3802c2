"""Pretrained-model encoder backends (optional; local checkpoints only).

These adapters wrap HuggingFace models behind the same protocols as the
hashing family. They are lazy: torch/transformers are imported on first
use, and every model must already exist on disk (``local_files_only``) —
extraction runs offline by design. Point the environment variables at
local checkpoint directories:

- ``MEMEFUSE_MM_MODEL``       vision-language encoder (pooled first token)
- ``MEMEFUSE_CAPTION_MODEL``  image-to-text captioner
- ``MEMEFUSE_TEXT_MODEL``     text encoder for captions (pooled, 768-d)
- ``MEMEFUSE_SENTI_TEXT_MODEL`` / ``MEMEFUSE_SENTI_IMAGE_MODEL``
  3-class sentiment heads; models with a different class count must be
  remapped to (negative, neutral, positive) before use.
"""

from __future__ import annotations

import os

import numpy as np

from .encoders import EncoderError, EncoderSuite, SplitSentiment


def _require_env(var: str) -> str:
    path = os.environ.get(var)
    if not path or not os.path.isdir(path):
        raise EncoderError(
            f"{var} must point at a local checkpoint directory for the "
            "pretrained encoder family"
        )
    return path


def _lazy_imports():
    try:
        import torch
        from transformers import AutoImageProcessor, AutoModel, AutoTokenizer, pipeline
    except ImportError as exc:
        raise EncoderError(
            "the pretrained encoder family needs the [transformers] extra "
            "(pip install 'meme-extractors[transformers]')"
        ) from exc
    return torch, AutoImageProcessor, AutoModel, AutoTokenizer, pipeline


class PooledTextEncoder:
    """Mean-pooled final hidden state of a local text encoder."""

    def __init__(self, model_path: str):
        torch, _, AutoModel, AutoTokenizer, _ = _lazy_imports()
        self._torch = torch
        self._tokenizer = AutoTokenizer.from_pretrained(model_path, local_files_only=True)
        self._model = AutoModel.from_pretrained(model_path, local_files_only=True).eval()
        self.dim = int(self._model.config.hidden_size)

    def encode(self, text: str) -> np.ndarray:
        torch = self._torch
        with torch.no_grad():
            tokens = self._tokenizer(text, return_tensors="pt", truncation=True)
            hidden = self._model(**tokens).last_hidden_state[0]
        return hidden.mean(dim=0).numpy().astype(np.float64)


class FirstTokenMultimodalEncoder:
    """First-token pooled output of a local vision-language encoder."""

    def __init__(self, model_path: str):
        torch, AutoImageProcessor, AutoModel, AutoTokenizer, _ = _lazy_imports()
        self._torch = torch
        self._processor = AutoImageProcessor.from_pretrained(model_path, local_files_only=True)
        self._tokenizer = AutoTokenizer.from_pretrained(model_path, local_files_only=True)
        self._model = AutoModel.from_pretrained(model_path, local_files_only=True).eval()
        self.dim = int(self._model.config.hidden_size)

    def embed(self, image, text: str) -> np.ndarray:
        torch = self._torch
        with torch.no_grad():
            inputs = self._tokenizer(text, return_tensors="pt", truncation=True)
            inputs.update(self._processor(images=image, return_tensors="pt"))
            hidden = self._model(**inputs).last_hidden_state[0]
        return hidden[0].numpy().astype(np.float64)


class PipelineCaptioner:
    """HuggingFace image-to-text pipeline over a local captioning model."""

    def __init__(self, model_path: str):
        *_, pipeline = _lazy_imports()
        self._pipe = pipeline("image-to-text", model=model_path, local_files_only=True)

    def caption(self, image) -> str:
        result = self._pipe(image)
        return result[0]["generated_text"].strip()


class PipelineSentiment:
    """3-class sentiment logits from a local classification model."""

    def __init__(self, model_path: str, modality: str):
        torch, AutoImageProcessor, AutoModel, AutoTokenizer, pipeline = _lazy_imports()
        from transformers import (
            AutoModelForImageClassification,
            AutoModelForSequenceClassification,
        )

        self._torch = torch
        self._modality = modality
        if modality == "text":
            self._tokenizer = AutoTokenizer.from_pretrained(model_path, local_files_only=True)
            self._model = AutoModelForSequenceClassification.from_pretrained(
                model_path, local_files_only=True
            ).eval()
        else:
            self._processor = AutoImageProcessor.from_pretrained(
                model_path, local_files_only=True
            )
            self._model = AutoModelForImageClassification.from_pretrained(
                model_path, local_files_only=True
            ).eval()
        self.k = int(self._model.config.num_labels)
        if self.k != 3:
            raise EncoderError(
                f"sentiment model at {model_path} emits {self.k} classes; remap "
                "to (negative, neutral, positive) before extraction"
            )

    def text_logits(self, text: str) -> np.ndarray:
        if self._modality != "text":
            raise EncoderError("this sentiment model handles images only")
        with self._torch.no_grad():
            tokens = self._tokenizer(text, return_tensors="pt", truncation=True)
            return self._model(**tokens).logits[0].numpy().astype(np.float64)

    def image_logits(self, image) -> np.ndarray:
        if self._modality != "image":
            raise EncoderError("this sentiment model handles text only")
        with self._torch.no_grad():
            inputs = self._processor(images=image, return_tensors="pt")
            return self._model(**inputs).logits[0].numpy().astype(np.float64)


def build_suite() -> EncoderSuite:
    return EncoderSuite(
        name="pretrained",
        multimodal=FirstTokenMultimodalEncoder(_require_env("MEMEFUSE_MM_MODEL")),
        captioner=PipelineCaptioner(_require_env("MEMEFUSE_CAPTION_MODEL")),
        text_encoder=PooledTextEncoder(_require_env("MEMEFUSE_TEXT_MODEL")),
        sentiment=SplitSentiment(
            PipelineSentiment(_require_env("MEMEFUSE_SENTI_TEXT_MODEL"), "text"),
            PipelineSentiment(_require_env("MEMEFUSE_SENTI_IMAGE_MODEL"), "image"),
        ),
    )
