"""The three extraction passes and the dataset-directory writer.

Each pass walks the raw entries in manifest order and produces one channel
file; row indices follow that order exactly, so ids align across channels
by construction. A pass skips an entry (with a logged warning) when its
input is unusable — an unreadable image skips the image-dependent passes
but never the text-sentiment pass.

Entries that end up without the required ``mm`` channel are excluded from
the output manifest (and listed in ``skipped.jsonl``): the store contract
requires every record to carry the multimodal vector, and a silently
half-present record would fail validation downstream anyway.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .encoders import EncoderError, EncoderSuite
from .entries import RawMemeEntry
from .formats import manifest_line, write_channel_file, write_manifest

log = logging.getLogger("meme_extractors")

CHANNEL_FILES = {
    "mm": "mm.mfe",
    "cap": "cap.mfe",
    "senti_t": "senti_t.mfe",
    "senti_v": "senti_v.mfe",
}


@dataclass
class ChannelResult:
    """Rows for one channel plus the id -> row index mapping."""

    name: str
    dim: int
    rows: list[np.ndarray] = field(default_factory=list)
    row_of: dict[str, int] = field(default_factory=dict)

    def append(self, rec_id: str, vector: np.ndarray) -> None:
        self.row_of[rec_id] = len(self.rows)
        self.rows.append(np.asarray(vector, dtype=np.float64))


def _load_image(entry: RawMemeEntry) -> Image.Image | None:
    try:
        with Image.open(entry.image_path) as img:
            return img.convert("RGB")
    except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
        log.warning("skipping image for '%s': %s", entry.id, exc)
        return None


def extract_mm(entries: list[RawMemeEntry], suite: EncoderSuite) -> ChannelResult:
    """Joint image+text vectors; entries with unreadable images are skipped."""
    result = ChannelResult(name="mm", dim=suite.multimodal.dim)
    for entry in entries:
        image = _load_image(entry)
        if image is None:
            continue
        result.append(entry.id, suite.multimodal.embed(image, entry.text))
    return result


def extract_caption(entries: list[RawMemeEntry], suite: EncoderSuite) -> ChannelResult:
    """Machine captions, encoded to vectors; skips unreadable images."""
    result = ChannelResult(name="cap", dim=suite.text_encoder.dim)
    for entry in entries:
        image = _load_image(entry)
        if image is None:
            continue
        try:
            caption = suite.captioner.caption(image)
        except EncoderError as exc:
            log.warning("captioner failed for '%s': %s", entry.id, exc)
            continue
        result.append(entry.id, suite.text_encoder.encode(caption))
    return result


def extract_sentiment(
    entries: list[RawMemeEntry], suite: EncoderSuite
) -> tuple[ChannelResult, ChannelResult]:
    """Text and visual sentiment logits (k=3 each, enforced by the suite)."""
    text_result = ChannelResult(name="senti_t", dim=suite.sentiment.k)
    visual_result = ChannelResult(name="senti_v", dim=suite.sentiment.k)
    for entry in entries:
        text_result.append(entry.id, suite.sentiment.text_logits(entry.text))
        image = _load_image(entry)
        if image is None:
            continue
        visual_result.append(entry.id, suite.sentiment.image_logits(image))
    return text_result, visual_result


def extract_dataset(
    entries: list[RawMemeEntry],
    suite: EncoderSuite,
    out_dir: str | Path,
) -> dict[str, int]:
    """Run all passes and write a complete dataset directory.

    Returns counts: entries seen, written, skipped.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    channels = [
        extract_mm(entries, suite),
        extract_caption(entries, suite),
        *extract_sentiment(entries, suite),
    ]
    for channel in channels:
        write_channel_file(
            out_dir / CHANNEL_FILES[channel.name], channel.rows, channel.dim
        )

    lines: list[str] = []
    skipped: list[str] = []
    for entry in entries:
        rows = {c.name: c.row_of[entry.id] for c in channels if entry.id in c.row_of}
        if "mm" not in rows:
            skipped.append(entry.id)
            log.warning("entry '%s' has no multimodal vector; omitted from manifest", entry.id)
            continue
        lines.append(manifest_line(entry.id, entry.label, entry.split, rows))
    write_manifest(out_dir / "manifest.jsonl", lines)
    if skipped:
        with open(out_dir / "skipped.jsonl", "w", encoding="utf-8") as fh:
            for rec_id in skipped:
                fh.write(json.dumps({"id": rec_id, "reason": "unreadable image"}) + "\n")

    return {"seen": len(entries), "written": len(lines), "skipped": len(skipped)}
