"""Seeded synthetic datasets with planted benign confounders.

Each record has two latent unit vectors: an image meaning ``u`` and a text
meaning ``v``. A fixed latent axis measures hate content; with
``a = <u, axis>`` and ``b = <v, axis>``, a meme is hateful exactly when the
text adds hate relative to the image, ``b - a >= HATE_MARGIN``.

Channel construction:

- ``mm`` encodes ``u + v`` (plus noise). The sum only exposes symmetric
  information about (a, b), so the signed contrast ``b - a`` that carries
  the label is not linearly recoverable from it.
- ``cap`` encodes ``u`` alone (the machine caption describes the image),
  so ``b - a`` becomes a linear readout of the (mm, cap) pair.
- benign text confounders take ``b = a`` exactly: the text restates the
  image, the mm channel sees a typical composition with no trace of the
  flip, and only the caption channel separates them from hateful memes.
- benign image confounders invert the construction (``a >= b + margin``:
  the image context defuses hateful-looking text), so they skew the mm
  channel toward the hateful range.
- sentiment logits correlate with the label through a noisy label-flip
  channel, independent of the embedding noise.

At ``noise_sigma = 0`` the dataset is linearly separable from the
concatenated (mm, cap) channels by construction.

Record counts per meme type, and per split within each type, use exact
largest-remainder apportionment; hateful types sum to half of the default
mix, so splits come out label-balanced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ConfigError
from .store import (
    Dataset,
    EmbeddingRecord,
    ManifestEntry,
    MANIFEST_FILENAME,
    TAGS_FILENAME,
    channel_filename,
    load_dataset_dir,
    read_tags,
    write_channel_file,
    write_manifest,
    write_tags,
)

MEME_TYPES = (
    "multimodal_hate",
    "unimodal_hate",
    "benign_text_confounder",
    "benign_image_confounder",
    "random_benign",
)
HATEFUL_TYPES = ("multimodal_hate", "unimodal_hate")

DEFAULT_MIX = {
    "multimodal_hate": 0.40,
    "unimodal_hate": 0.10,
    "benign_text_confounder": 0.20,
    "benign_image_confounder": 0.20,
    "random_benign": 0.10,
}

# Latent geometry: hateful iff b - a >= HATE_MARGIN; benign types sit at
# b - a <= 0, text confounders exactly at 0.
HATE_MARGIN = 0.25
A_HALF_RANGE = 0.5
B_EXTRA_WIDTH = 0.55
B_CEILING = 0.95
UNIMODAL_B_RANGE = (0.75, 0.95)
IMAGE_CONF_B_RANGE = (-0.25, 0.6)
LATENT_DIM_MAX = 8

SENTIMENT_AMPLITUDE = 2.5
SENTIMENT_FIDELITY_TEXT = 0.7
SENTIMENT_FIDELITY_VISUAL = 0.6


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for one generated dataset; identical configs give identical bytes."""

    n: int = 1000
    seed: int = 0
    d_m: int = 16
    d_h: int = 16
    k: int = 3
    mix: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_MIX))
    noise_sigma: float = 0.1
    split_fractions: tuple[float, float, float] = (0.85, 0.05, 0.10)

    def __post_init__(self):
        if self.n < 20:
            raise ConfigError("n must be at least 20")
        if self.d_m < 2 or self.d_h < 2:
            raise ConfigError("d_m and d_h must be at least 2")
        if self.k < 2:
            raise ConfigError("k must be at least 2")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")
        if set(self.mix) != set(MEME_TYPES):
            unknown = set(self.mix) - set(MEME_TYPES)
            missing = set(MEME_TYPES) - set(self.mix)
            detail = []
            if unknown:
                detail.append(f"unknown {sorted(unknown)}")
            if missing:
                detail.append(f"missing {sorted(missing)}")
            raise ConfigError(f"mix proportions: {'; '.join(detail)}")
        if any(p < 0 for p in self.mix.values()):
            raise ConfigError("mix proportions must be non-negative")
        if not math.isclose(sum(self.mix.values()), 1.0, abs_tol=1e-9):
            raise ConfigError(f"mix proportions must sum to 1, got {sum(self.mix.values()):.6g}")
        if len(self.split_fractions) != 3 or any(f < 0 for f in self.split_fractions):
            raise ConfigError("split_fractions must be three non-negative numbers")
        if not math.isclose(sum(self.split_fractions), 1.0, abs_tol=1e-9):
            raise ConfigError(
                f"split_fractions must sum to 1, got {sum(self.split_fractions):.6g}"
            )


def apportion(total: int, fractions) -> list[int]:
    """Largest-remainder apportionment of ``total`` across ``fractions``.

    Deterministic: leftover units go to the largest fractional parts,
    earliest index first on ties.
    """
    exact = [total * f for f in fractions]
    counts = [int(math.floor(e)) for e in exact]
    leftover = total - sum(counts)
    remainders = sorted(
        range(len(fractions)), key=lambda i: (-(exact[i] - counts[i]), i)
    )
    for i in remainders[:leftover]:
        counts[i] += 1
    return counts


def _orthonormal_columns(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q * np.sign(np.diag(r))


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def _latent_pair(meme_type: str, rng: np.random.Generator) -> tuple[float, float]:
    """Axis coordinates (a, b) of the image and text latents for one record."""
    if meme_type == "multimodal_hate":
        a = rng.uniform(-A_HALF_RANGE, A_HALF_RANGE)
        lo = a + HATE_MARGIN
        b = rng.uniform(lo, min(lo + B_EXTRA_WIDTH, B_CEILING))
    elif meme_type == "unimodal_hate":
        a = rng.uniform(-A_HALF_RANGE, A_HALF_RANGE)
        b = rng.uniform(*UNIMODAL_B_RANGE)
    elif meme_type == "benign_text_confounder":
        a = rng.uniform(-A_HALF_RANGE, A_HALF_RANGE)
        b = a
    elif meme_type == "benign_image_confounder":
        b = rng.uniform(*IMAGE_CONF_B_RANGE)
        lo = b + HATE_MARGIN
        a = rng.uniform(lo, min(lo + B_EXTRA_WIDTH, B_CEILING))
    elif meme_type == "random_benign":
        a = rng.uniform(-A_HALF_RANGE, A_HALF_RANGE)
        hi = a - HATE_MARGIN
        b = rng.uniform(max(hi - B_EXTRA_WIDTH, -B_CEILING), hi)
    else:
        raise ConfigError(f"unknown meme type '{meme_type}'")
    return a, b


def _embed_latent(coord: float, perp: np.ndarray) -> np.ndarray:
    scale = math.sqrt(max(1.0 - coord * coord, 0.0))
    return np.concatenate([[coord], scale * perp])


def _sentiment_logits(
    label: int, k: int, fidelity: float, amplitude: float,
    sigma: float, rng: np.random.Generator,
) -> np.ndarray:
    # Noisy channel: the "right" class (0 = negative for hateful, k-1 =
    # positive for benign) comes through with probability `fidelity`.
    target = 0 if label == 1 else k - 1
    if rng.uniform() < fidelity:
        cls = target
    else:
        others = [c for c in range(k) if c != target]
        cls = others[rng.integers(len(others))]
    logits = sigma * rng.standard_normal(k)
    logits[cls] += amplitude
    return logits


@dataclass
class SynthRecord:
    id: str
    meme_type: str
    split: str
    label: int


@dataclass
class SynthDataset:
    """Generated records plus the per-channel matrices, in manifest order."""

    config: SynthConfig
    records: list[SynthRecord]
    channels: dict[str, np.ndarray]

    def write(self, out_dir: str | Path) -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        entries = [
            ManifestEntry(
                id=rec.id,
                split=rec.split,
                label=rec.label,
                channels={name: i for name in self.channels},
            )
            for i, rec in enumerate(self.records)
        ]
        write_manifest(out_dir / MANIFEST_FILENAME, entries)
        for name, rows in self.channels.items():
            write_channel_file(out_dir / channel_filename(name), rows, rows.shape[1])
        write_tags(out_dir / TAGS_FILENAME, {r.id: r.meme_type for r in self.records})

    def to_dataset(self) -> Dataset:
        records = []
        for i, rec in enumerate(self.records):
            records.append(
                EmbeddingRecord(
                    id=rec.id,
                    split=rec.split,
                    label=rec.label,
                    e_m=self.channels["mm"][i].astype(np.float64),
                    h=self.channels["cap"][i].astype(np.float64),
                    s_t=self.channels["senti_t"][i].astype(np.float64),
                    s_v=self.channels["senti_v"][i].astype(np.float64),
                )
            )
        dims = {name: rows.shape[1] for name, rows in self.channels.items()}
        return Dataset(records=records, dims=dims)


def generate(config: SynthConfig) -> SynthDataset:
    """Generate one dataset; deterministic in every byte given the config."""
    rng = np.random.default_rng(config.seed)
    latent_dim = min(LATENT_DIM_MAX, config.d_m, config.d_h)

    basis_mm = _orthonormal_columns(config.d_m, latent_dim, rng)
    basis_cap = _orthonormal_columns(config.d_h, latent_dim, rng)

    type_counts = apportion(config.n, [config.mix[t] for t in MEME_TYPES])
    slots: list[tuple[str, str]] = []
    for meme_type, count in zip(MEME_TYPES, type_counts):
        split_counts = apportion(count, config.split_fractions)
        for split, split_count in zip(("train", "val", "test"), split_counts):
            slots.extend([(meme_type, split)] * split_count)

    order = rng.permutation(len(slots))
    sigma = config.noise_sigma

    records: list[SynthRecord] = []
    mm_rows = np.empty((config.n, config.d_m), dtype=np.float64)
    cap_rows = np.empty((config.n, config.d_h), dtype=np.float64)
    st_rows = np.empty((config.n, config.k), dtype=np.float64)
    sv_rows = np.empty((config.n, config.k), dtype=np.float64)

    for row, slot in enumerate(order):
        meme_type, split = slots[slot]
        label = int(meme_type in HATEFUL_TYPES)
        a, b = _latent_pair(meme_type, rng)
        u = _embed_latent(a, _unit(rng.standard_normal(latent_dim - 1)))
        v = _embed_latent(b, _unit(rng.standard_normal(latent_dim - 1)))
        mm_rows[row] = basis_mm @ (u + v) + sigma * rng.standard_normal(config.d_m)
        cap_rows[row] = basis_cap @ u + sigma * rng.standard_normal(config.d_h)
        st_rows[row] = _sentiment_logits(
            label, config.k, SENTIMENT_FIDELITY_TEXT, SENTIMENT_AMPLITUDE, sigma, rng
        )
        sv_rows[row] = _sentiment_logits(
            label, config.k, SENTIMENT_FIDELITY_VISUAL, SENTIMENT_AMPLITUDE, sigma, rng
        )
        records.append(
            SynthRecord(id=f"m{row:05d}", meme_type=meme_type, split=split, label=label)
        )

    channels = {
        "mm": mm_rows.astype(np.float32),
        "cap": cap_rows.astype(np.float32),
        "senti_t": st_rows.astype(np.float32),
        "senti_v": sv_rows.astype(np.float32),
    }
    return SynthDataset(config=config, records=records, channels=channels)


@dataclass
class CompositionReport:
    """Counts per meme type and split, plus per-split label balance."""

    total: int
    split_counts: dict[str, int]
    type_counts: dict[str, dict[str, int]]
    label_counts: dict[str, dict[int, int]]

    def to_text(self) -> str:
        lines = [f"records: {self.total}"]
        lines.append(
            "splits: "
            + ", ".join(f"{s}={self.split_counts.get(s, 0)}" for s in ("train", "val", "test"))
        )
        for split in ("train", "val", "test"):
            counts = self.label_counts.get(split, {})
            n = self.split_counts.get(split, 0)
            pos = counts.get(1, 0)
            frac = pos / n if n else 0.0
            lines.append(f"label balance [{split}]: {pos}/{n} hateful ({frac:.1%})")
        if self.type_counts:
            lines.append("composition:")
            for meme_type in MEME_TYPES:
                if meme_type not in self.type_counts:
                    continue
                per_split = self.type_counts[meme_type]
                total = sum(per_split.values())
                detail = ", ".join(
                    f"{s}={per_split.get(s, 0)}" for s in ("train", "val", "test")
                )
                lines.append(f"  {meme_type}: {total} ({detail})")
        else:
            lines.append("composition: no type tags available")
        return "\n".join(lines)


def describe(dataset: Dataset, tags: Mapping[str, str] | None = None) -> CompositionReport:
    """Composition report for any loaded dataset; type counts need tags."""
    split_counts: dict[str, int] = {}
    label_counts: dict[str, dict[int, int]] = {}
    type_counts: dict[str, dict[str, int]] = {}
    for rec in dataset.records:
        split_counts[rec.split] = split_counts.get(rec.split, 0) + 1
        if rec.label is not None:
            label_counts.setdefault(rec.split, {})
            label_counts[rec.split][rec.label] = label_counts[rec.split].get(rec.label, 0) + 1
        if tags and rec.id in tags:
            meme_type = tags[rec.id]
            type_counts.setdefault(meme_type, {})
            type_counts[meme_type][rec.split] = type_counts[meme_type].get(rec.split, 0) + 1
    return CompositionReport(
        total=len(dataset.records),
        split_counts=split_counts,
        type_counts=type_counts,
        label_counts=label_counts,
    )


def describe_dir(dataset_dir: str | Path) -> CompositionReport:
    dataset_dir = Path(dataset_dir)
    dataset = load_dataset_dir(dataset_dir)
    tags_path = dataset_dir / TAGS_FILENAME
    tags = read_tags(tags_path) if tags_path.exists() else None
    return describe(dataset, tags)
