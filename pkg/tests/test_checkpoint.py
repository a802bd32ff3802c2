"""Checkpoint format round trips and corruption handling."""

import numpy as np
import pytest

from memefuse.checkpoint import (
    deserialize_model,
    load_checkpoint,
    save_checkpoint,
    serialize_model,
)
from memefuse.errors import DataError
from memefuse.fusion import FusionConfig
from memefuse.training import TrainConfig, init_model


def models():
    rng = np.random.default_rng(0)
    tc = TrainConfig(hidden_dims=(5, 3))
    for mode in ("mm_only", "cap_concat", "cap_bilinear", "senti", "combined"):
        cfg = FusionConfig(mode=mode, d_m=6, d_h=4, bilinear_dim=3, k=2)
        yield init_model(cfg, tc, rng)


@pytest.mark.parametrize("model", list(models()), ids=lambda m: m.config.mode)
def test_roundtrip_bit_exact(model):
    data = serialize_model(model)
    again = deserialize_model(data)
    assert again.config == model.config
    assert serialize_model(again) == data
    for a, b in zip(model.parameters(), again.parameters()):
        assert a.tobytes() == b.tobytes()


def test_file_roundtrip(tmp_path):
    model = next(models())
    path = tmp_path / "model.mfm"
    save_checkpoint(path, model)
    again = load_checkpoint(path)
    assert serialize_model(again) == serialize_model(model)


def test_bad_magic_rejected():
    data = serialize_model(next(models()))
    with pytest.raises(DataError, match="magic"):
        deserialize_model(b"NOPE" + data[4:])


def test_truncated_rejected():
    data = serialize_model(next(models()))
    with pytest.raises(DataError, match="truncated"):
        deserialize_model(data[:-4])


def test_trailing_bytes_rejected():
    data = serialize_model(next(models()))
    with pytest.raises(DataError, match="trailing"):
        deserialize_model(data + b"\x00" * 8)
