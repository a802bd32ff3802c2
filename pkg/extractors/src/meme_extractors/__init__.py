"""Offline feature extraction bridging raw memes to the embedding store.

Runs pluggable encoders (multimodal representation, caption generation and
encoding, text/visual sentiment) over a directory of meme images plus a
text manifest, and writes byte-exact embedding-store files. Coupling to
the classification engine is file-mediated only.
"""

from .encoders import EncoderSuite, build_suite
from .entries import KeyMap, RawMemeEntry, read_raw_manifest
from .extract import extract_caption, extract_dataset, extract_mm, extract_sentiment

__all__ = [
    "EncoderSuite",
    "KeyMap",
    "RawMemeEntry",
    "build_suite",
    "extract_caption",
    "extract_dataset",
    "extract_mm",
    "extract_sentiment",
    "read_raw_manifest",
]

__version__ = "0.1.0"
