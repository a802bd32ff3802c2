"""Writers for the embedding-store file formats.

This package talks to the classification engine only through its on-disk
contract, so the formats are implemented here independently and must stay
byte-exact:

- channel files: magic ``MFE1``, uint32 version 1, uint32 dim, uint64
  count (all little-endian), then count*dim float32 row-major values;
  exactly ``20 + 4*dim*count`` bytes, all values finite.
- manifest: one JSON object per line with ``id``, ``label`` (0/1/null),
  ``split`` and ``channels`` (channel name -> row index).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

CHANNEL_MAGIC = b"MFE1"
CHANNEL_VERSION = 1


class FormatError(ValueError):
    """Raised when rows cannot be encoded as a valid channel file."""


def encode_channel(rows: Sequence[np.ndarray], dim: int) -> bytes:
    if dim <= 0:
        raise FormatError(f"channel dim must be positive, got {dim}")
    out = np.empty((len(rows), dim), dtype="<f4")
    for i, row in enumerate(rows):
        arr = np.asarray(row, dtype="<f4")
        if arr.shape != (dim,):
            raise FormatError(f"row {i} has shape {arr.shape}, expected ({dim},)")
        if not np.all(np.isfinite(arr)):
            raise FormatError(f"row {i} contains a non-finite value")
        out[i] = arr
    header = CHANNEL_MAGIC + struct.pack("<IIQ", CHANNEL_VERSION, dim, len(rows))
    return header + out.tobytes()


def write_channel_file(path: str | Path, rows: Sequence[np.ndarray], dim: int) -> None:
    Path(path).write_bytes(encode_channel(rows, dim))


def manifest_line(
    rec_id: str,
    label: int | None,
    split: str,
    channels: Mapping[str, int],
) -> str:
    return json.dumps(
        {"id": rec_id, "label": label, "split": split, "channels": dict(channels)},
        sort_keys=True,
    )


def write_manifest(path: str | Path, lines: Sequence[str]) -> None:
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
