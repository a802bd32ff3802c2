"""On-disk dataset representation: binary channel files plus a JSONL manifest.

A dataset directory holds one channel file per embedding channel and a
line-delimited manifest mapping record ids to rows in those files.

Channel file layout (magic "MFE1", all integers little-endian):

- bytes 0..4    magic ``MFE1``
- bytes 4..8    uint32 format version (currently 1)
- bytes 8..12   uint32 vector dimension
- bytes 12..20  uint64 row count
- bytes 20..    count * dim float32 values, row-major

Total length is therefore exactly ``20 + 4 * dim * count``. Every stored
float must be finite. Channels are columnar (one file per channel) because
channels are optional per experiment and per record.

Manifest layout: one JSON object per line with keys ``id``, ``label``
(0, 1, or null; null only allowed on the test split), ``split`` (train,
val, test) and ``channels`` (channel name -> row index).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError

CHANNEL_MAGIC = b"MFE1"
CHANNEL_VERSION = 1
CHANNEL_HEADER_SIZE = 20
CHANNEL_NAMES = ("mm", "cap", "senti_t", "senti_v")
SPLITS = ("train", "val", "test")

MANIFEST_FILENAME = "manifest.jsonl"
TAGS_FILENAME = "tags.jsonl"


def channel_filename(name: str) -> str:
    return f"{name}.mfe"


def write_channel(rows: Sequence[Sequence[float]] | np.ndarray, dim: int) -> bytes:
    """Encode vectors into channel-file bytes.

    Args:
        rows: Sequence of equal-length float vectors (may be empty).
        dim: Expected dimensionality of every row.

    Returns:
        The encoded file contents.

    Raises:
        DataError: On a dimension mismatch (reported with its row index),
            a non-positive dim, or any non-finite value.
    """
    if dim <= 0:
        raise DataError(f"channel dim must be positive, got {dim}")
    if isinstance(rows, np.ndarray):
        if rows.size == 0:
            rows = rows.reshape(0, dim)
        if rows.ndim != 2 or rows.shape[1] != dim:
            raise DataError(f"rows have shape {rows.shape}, expected (*, {dim})")
        arr = rows.astype(np.float32, copy=False)
    else:
        rows = list(rows)
        for i, row in enumerate(rows):
            if len(row) != dim:
                raise DataError(f"row {i} has length {len(row)}, expected dim {dim}")
        arr = np.asarray(rows, dtype=np.float32).reshape(len(rows), dim)
    bad = ~np.isfinite(arr)
    if bad.any():
        i = int(np.argwhere(bad.any(axis=1))[0][0])
        raise DataError(f"row {i} contains a non-finite value")
    header = CHANNEL_MAGIC + struct.pack("<IIQ", CHANNEL_VERSION, dim, arr.shape[0])
    return header + arr.astype("<f4").tobytes()


def read_channel(data: bytes) -> tuple[int, np.ndarray]:
    """Decode channel-file bytes; inverse of :func:`write_channel`.

    Returns:
        ``(dim, rows)`` where rows is a float32 array of shape (count, dim).

    Raises:
        DataError: Bad magic or version (format error), byte length not
            matching the header (length error), or non-finite payload values
            (validation error naming the row).
    """
    if len(data) < CHANNEL_HEADER_SIZE:
        raise DataError(
            f"channel file too short: {len(data)} bytes, header needs {CHANNEL_HEADER_SIZE}"
        )
    magic = data[:4]
    if magic != CHANNEL_MAGIC:
        raise DataError(f"bad channel magic {magic!r}, expected {CHANNEL_MAGIC!r}")
    version, dim, count = struct.unpack("<IIQ", data[4:CHANNEL_HEADER_SIZE])
    if version != CHANNEL_VERSION:
        raise DataError(f"unsupported channel version {version}, expected {CHANNEL_VERSION}")
    if dim <= 0:
        raise DataError(f"channel dim must be positive, got {dim}")
    expected = CHANNEL_HEADER_SIZE + 4 * dim * count
    if len(data) != expected:
        raise DataError(
            f"channel file length {len(data)} does not match header "
            f"(dim={dim}, count={count} requires {expected} bytes)"
        )
    rows = np.frombuffer(data[CHANNEL_HEADER_SIZE:], dtype="<f4").reshape(count, dim)
    bad = ~np.isfinite(rows)
    if bad.any():
        i = int(np.argwhere(bad.any(axis=1))[0][0])
        raise DataError(f"row {i} contains a non-finite value")
    return dim, rows


def write_channel_file(path: str | Path, rows, dim: int) -> None:
    Path(path).write_bytes(write_channel(rows, dim))


def read_channel_file(path: str | Path) -> tuple[int, np.ndarray]:
    return read_channel(Path(path).read_bytes())


@dataclass
class ManifestEntry:
    """One manifest line: a record id with its split, label and channel rows."""

    id: str
    split: str
    label: int | None
    channels: dict[str, int]

    @classmethod
    def from_json_line(cls, line: str, lineno: int) -> "ManifestEntry":
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"manifest line {lineno}: invalid JSON ({exc})") from exc
        if not isinstance(obj, dict):
            raise DataError(f"manifest line {lineno}: expected an object")
        try:
            rec_id = obj["id"]
            split = obj["split"]
            channels = obj["channels"]
        except KeyError as exc:
            raise DataError(f"manifest line {lineno}: missing key {exc}") from exc
        label = obj.get("label")
        if split not in SPLITS:
            raise DataError(f"manifest entry '{rec_id}': unknown split '{split}'")
        if label not in (0, 1, None):
            raise DataError(f"manifest entry '{rec_id}': label must be 0, 1 or null")
        if label is None and split != "test":
            raise DataError(f"manifest entry '{rec_id}': missing label on split '{split}'")
        if not isinstance(channels, dict) or not channels:
            raise DataError(f"manifest entry '{rec_id}': channels must be a non-empty map")
        for name, row in channels.items():
            if name not in CHANNEL_NAMES:
                raise DataError(f"manifest entry '{rec_id}': unknown channel '{name}'")
            if not isinstance(row, int) or row < 0:
                raise DataError(
                    f"manifest entry '{rec_id}': channel '{name}' row must be a non-negative int"
                )
        return cls(id=str(rec_id), split=split, label=label, channels=dict(channels))

    def to_json_line(self) -> str:
        return json.dumps(
            {"id": self.id, "label": self.label, "split": self.split, "channels": self.channels},
            sort_keys=True,
        )


@dataclass
class EmbeddingRecord:
    """One meme's precomputed channels, fully resolved and validated.

    ``e_m`` is the pooled multimodal vector, ``h`` the encoded machine
    caption, ``s_t``/``s_v`` the text and visual sentiment logits. Optional
    channels are None when the manifest omits them.
    """

    id: str
    split: str
    label: int | None
    e_m: np.ndarray
    h: np.ndarray | None = None
    s_t: np.ndarray | None = None
    s_v: np.ndarray | None = None

    def channel(self, name: str) -> np.ndarray | None:
        return {"mm": self.e_m, "cap": self.h, "senti_t": self.s_t, "senti_v": self.s_v}[name]


@dataclass
class Dataset:
    """Immutable in-memory dataset: records plus per-channel dimensions."""

    records: list[EmbeddingRecord]
    dims: dict[str, int] = field(default_factory=dict)

    def split(self, name: str) -> list[EmbeddingRecord]:
        if name not in SPLITS:
            raise DataError(f"unknown split '{name}'")
        return [r for r in self.records if r.split == name]

    def __len__(self) -> int:
        return len(self.records)


_RECORD_FIELD = {"mm": "e_m", "cap": "h", "senti_t": "s_t", "senti_v": "s_v"}


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            entries.append(ManifestEntry.from_json_line(line, lineno))
    return entries


def write_manifest(path: str | Path, entries: Iterable[ManifestEntry]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(entry.to_json_line() + "\n")


def load_dataset(
    manifest_path: str | Path,
    channel_paths: Mapping[str, str | Path],
) -> Dataset:
    """Resolve a manifest against its channel files into EmbeddingRecords.

    Vectors are promoted to float64 so downstream arithmetic and gradient
    checks run at 64-bit precision; the float32 file payload converts
    exactly.

    Raises:
        DataError: duplicate ids, dangling row indices (named with id and
            channel), labels missing on train/val, or any channel-file
            format violation.
    """
    entries = read_manifest(manifest_path)
    seen: set[str] = set()
    for entry in entries:
        if entry.id in seen:
            raise DataError(f"duplicate manifest id '{entry.id}'")
        seen.add(entry.id)

    channels: dict[str, np.ndarray] = {}
    dims: dict[str, int] = {}
    for name, path in channel_paths.items():
        if name not in CHANNEL_NAMES:
            raise DataError(f"unknown channel '{name}'")
        dim, rows = read_channel_file(path)
        channels[name] = rows.astype(np.float64)
        dims[name] = dim

    records = []
    for entry in entries:
        fields: dict[str, np.ndarray] = {}
        for name, row in entry.channels.items():
            if name not in channels:
                raise DataError(
                    f"manifest entry '{entry.id}' references channel '{name}' "
                    "but no file was provided for it"
                )
            table = channels[name]
            if row >= table.shape[0]:
                raise DataError(
                    f"manifest entry '{entry.id}': row {row} out of range for "
                    f"channel '{name}' (count {table.shape[0]})"
                )
            fields[_RECORD_FIELD[name]] = table[row]
        if "e_m" not in fields:
            raise DataError(f"manifest entry '{entry.id}' is missing the required 'mm' channel")
        records.append(
            EmbeddingRecord(id=entry.id, split=entry.split, label=entry.label, **fields)
        )
    return Dataset(records=records, dims=dims)


def load_dataset_dir(dataset_dir: str | Path) -> Dataset:
    """Load a dataset laid out as ``manifest.jsonl`` + ``<channel>.mfe`` files."""
    dataset_dir = Path(dataset_dir)
    manifest = dataset_dir / MANIFEST_FILENAME
    if not manifest.exists():
        raise DataError(f"no manifest found at {manifest}")
    channel_paths = {
        name: dataset_dir / channel_filename(name)
        for name in CHANNEL_NAMES
        if (dataset_dir / channel_filename(name)).exists()
    }
    return load_dataset(manifest, channel_paths)


def read_tags(path: str | Path) -> dict[str, str]:
    """Read the optional sidecar tag file mapping record id -> meme type."""
    tags: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                tags[str(obj["id"])] = str(obj["type"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataError(f"tag file line {lineno}: {exc}") from exc
    return tags


def write_tags(path: str | Path, tags: Mapping[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec_id, tag in tags.items():
            fh.write(json.dumps({"id": rec_id, "type": tag}) + "\n")
