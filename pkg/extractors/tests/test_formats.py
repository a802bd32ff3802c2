"""Byte-level checks of the channel file and manifest writers."""

import json
import struct

import numpy as np
import pytest

from meme_extractors.formats import FormatError, encode_channel, manifest_line


def test_header_layout():
    data = encode_channel([np.array([1.0, 2.0])], 2)
    assert data[:4] == b"MFE1"
    version, dim, count = struct.unpack("<IIQ", data[4:20])
    assert (version, dim, count) == (1, 2, 1)
    assert len(data) == 20 + 4 * 2 * 1
    assert struct.unpack("<ff", data[20:]) == (1.0, 2.0)


def test_empty_channel():
    data = encode_channel([], 7)
    assert len(data) == 20
    assert struct.unpack("<IIQ", data[4:20]) == (1, 7, 0)


def test_dimension_mismatch_names_row():
    with pytest.raises(FormatError, match="row 1"):
        encode_channel([np.zeros(3), np.zeros(2)], 3)


def test_non_finite_rejected():
    with pytest.raises(FormatError, match="row 0"):
        encode_channel([np.array([np.nan, 0.0])], 2)


def test_manifest_line_shape():
    line = manifest_line("abc", 1, "train", {"mm": 0, "cap": 3})
    obj = json.loads(line)
    assert obj == {"id": "abc", "label": 1, "split": "train", "channels": {"mm": 0, "cap": 3}}


def test_manifest_label_may_be_null():
    obj = json.loads(manifest_line("x", None, "test", {"mm": 0}))
    assert obj["label"] is None
