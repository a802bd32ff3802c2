"""Model checkpoint serialization (magic "MFM1", bit-exact round trips).

Layout, little-endian throughout:

- bytes 0..4   magic ``MFM1``
- uint32       format version (1)
- uint8        fusion mode index into :data:`memefuse.fusion.MODES`
- uint32 x4    d_m, d_h, bilinear_dim, k
- uint32       tensor count
- per tensor:  uint8 ndim, uint64 per dimension, float64 payload

Tensor order is fixed: bilinear M and b first when the mode uses them,
then weight/bias pairs of the MLP from input to output. Hidden widths are
reconstructed from tensor shapes on load.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DataError
from .fusion import MODES, BilinearParams, FusionConfig
from .model import FusionModel, MlpParams

CHECKPOINT_MAGIC = b"MFM1"
CHECKPOINT_VERSION = 1


def _pack_tensor(arr: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    header = struct.pack("<B", arr.ndim) + b"".join(
        struct.pack("<Q", d) for d in arr.shape
    )
    return header + arr.astype("<f8").tobytes()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise DataError("checkpoint truncated")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def tensor(self) -> np.ndarray:
        (ndim,) = self.unpack("<B")
        shape = tuple(self.unpack("<" + "Q" * ndim)) if ndim else ()
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        raw = self.take(8 * count)
        return np.frombuffer(raw, dtype="<f8").reshape(shape).copy()

    def done(self) -> bool:
        return self.pos == len(self.data)


def serialize_model(model: FusionModel) -> bytes:
    cfg = model.config
    out = CHECKPOINT_MAGIC + struct.pack(
        "<IBIIII",
        CHECKPOINT_VERSION,
        MODES.index(cfg.mode),
        cfg.d_m,
        cfg.d_h,
        cfg.bilinear_dim,
        cfg.k,
    )
    tensors: list[np.ndarray] = []
    if model.bilinear is not None:
        tensors.extend([model.bilinear.M, model.bilinear.b])
    for w, b in zip(model.mlp.weights, model.mlp.biases):
        tensors.extend([w, b])
    out += struct.pack("<I", len(tensors))
    for t in tensors:
        out += _pack_tensor(t)
    return out


def deserialize_model(data: bytes) -> FusionModel:
    if data[:4] != CHECKPOINT_MAGIC:
        raise DataError(f"bad checkpoint magic {data[:4]!r}, expected {CHECKPOINT_MAGIC!r}")
    reader = _Reader(data)
    reader.take(4)
    version, mode_idx, d_m, d_h, bilinear_dim, k = reader.unpack("<IBIIII")
    if version != CHECKPOINT_VERSION:
        raise DataError(f"unsupported checkpoint version {version}")
    if mode_idx >= len(MODES):
        raise DataError(f"unknown fusion mode index {mode_idx}")
    config = FusionConfig(
        mode=MODES[mode_idx], d_m=d_m, d_h=d_h, bilinear_dim=bilinear_dim, k=k
    )
    (n_tensors,) = reader.unpack("<I")
    tensors = [reader.tensor() for _ in range(n_tensors)]
    if not reader.done():
        raise DataError("trailing bytes after checkpoint payload")

    bilinear = None
    if config.uses_bilinear:
        if len(tensors) < 2:
            raise DataError("checkpoint missing bilinear tensors")
        bilinear = BilinearParams(M=tensors[0], b=tensors[1])
        tensors = tensors[2:]
    if len(tensors) < 2 or len(tensors) % 2 != 0:
        raise DataError("checkpoint MLP tensors must come in weight/bias pairs")
    mlp = MlpParams(weights=tensors[0::2], biases=tensors[1::2])
    return FusionModel(config=config, mlp=mlp, bilinear=bilinear)


def save_checkpoint(path: str | Path, model: FusionModel) -> None:
    Path(path).write_bytes(serialize_model(model))


def load_checkpoint(path: str | Path) -> FusionModel:
    return deserialize_model(Path(path).read_bytes())
