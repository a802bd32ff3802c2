"""Input manifest parsing for raw memes.

The native input is a JSONL file with one meme per line. Key names are
remappable so the challenge's original layout (``img``/``text``/``label``
plus a numeric id) loads without preprocessing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class InputError(ValueError):
    """Raised when the raw manifest cannot be parsed."""


@dataclass(frozen=True)
class KeyMap:
    """JSON key names for each RawMemeEntry field."""

    id: str = "id"
    image: str = "img"
    text: str = "text"
    label: str = "label"
    split: str = "split"

    @classmethod
    def parse(cls, spec: str | None) -> "KeyMap":
        """Parse ``field=key`` pairs, e.g. ``image=image_path,text=caption``."""
        if not spec:
            return cls()
        kwargs = {}
        for part in spec.split(","):
            if "=" not in part:
                raise InputError(f"bad key mapping '{part}', expected field=key")
            field, key = part.split("=", 1)
            field = field.strip()
            if field not in ("id", "image", "text", "label", "split"):
                raise InputError(f"unknown mapping field '{field}'")
            kwargs[field] = key.strip()
        return cls(**kwargs)


@dataclass
class RawMemeEntry:
    """One meme to extract: id, image path, overlaid text, optional label."""

    id: str
    image_path: Path
    text: str
    label: int | None
    split: str


def read_raw_manifest(
    path: str | Path,
    images_dir: str | Path,
    keymap: KeyMap | None = None,
    default_split: str = "train",
) -> list[RawMemeEntry]:
    keymap = keymap or KeyMap()
    images_dir = Path(images_dir)
    entries: list[RawMemeEntry] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"line {lineno}: invalid JSON ({exc})") from exc
            if keymap.id not in obj:
                raise InputError(f"line {lineno}: missing id key '{keymap.id}'")
            rec_id = str(obj[keymap.id])
            if rec_id in seen:
                raise InputError(f"line {lineno}: duplicate id '{rec_id}'")
            seen.add(rec_id)
            if keymap.image not in obj:
                raise InputError(f"line {lineno}: missing image key '{keymap.image}'")
            text = obj.get(keymap.text)
            if text is None:
                raise InputError(f"line {lineno}: text must be present (may be empty)")
            label = obj.get(keymap.label)
            if label not in (0, 1, None):
                raise InputError(f"line {lineno}: label must be 0, 1 or absent")
            split = obj.get(keymap.split, default_split)
            if split not in ("train", "val", "test"):
                raise InputError(f"line {lineno}: unknown split '{split}'")
            image_path = Path(obj[keymap.image])
            if not image_path.is_absolute():
                image_path = images_dir / image_path
            entries.append(
                RawMemeEntry(
                    id=rec_id,
                    image_path=image_path,
                    text=str(text),
                    label=label,
                    split=split,
                )
            )
    return entries
