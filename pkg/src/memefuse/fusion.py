"""Fused feature assembly for the five architecture variants.

Modes:

- ``mm_only``      joint multimodal vector alone
- ``cap_concat``   [e_m ; h]
- ``cap_bilinear`` [e_m ; h ; bilinear(e_m, h)]
- ``senti``        [e_m ; s_t ; s_v ; s_t + s_v]
- ``combined``     [e_m ; h ; bilinear(e_m, h) ; s_t ; s_v ; s_t + s_v]

The bilinear map is out[i] = sum_jk m[j] * M[i, j, k] * h[k] + b[i]; M and b
are learnable and trained jointly with the classifier head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .store import EmbeddingRecord

MODES = ("mm_only", "cap_concat", "cap_bilinear", "senti", "combined")
BILINEAR_MODES = ("cap_bilinear", "combined")
SENTIMENT_MODES = ("senti", "combined")


@dataclass(frozen=True)
class FusionConfig:
    """Which channels are used and how they are combined."""

    mode: str
    d_m: int = 768
    d_h: int = 768
    bilinear_dim: int = 768
    k: int = 3

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown fusion mode '{self.mode}' (choose from {MODES})")
        for name in ("d_m", "d_h", "bilinear_dim", "k"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")

    @property
    def uses_caption(self) -> bool:
        return self.mode in ("cap_concat", "cap_bilinear", "combined")

    @property
    def uses_bilinear(self) -> bool:
        return self.mode in BILINEAR_MODES

    @property
    def uses_sentiment(self) -> bool:
        return self.mode in SENTIMENT_MODES


def feature_dim(config: FusionConfig) -> int:
    """Exact length of the vector :func:`assemble` produces for this config."""
    dim = config.d_m
    if config.uses_caption:
        dim += config.d_h
    if config.uses_bilinear:
        dim += config.bilinear_dim
    if config.uses_sentiment:
        dim += 3 * config.k
    return dim


@dataclass
class BilinearParams:
    """Learnable bilinear tensor M (bilinear_dim, d_m, d_h) and bias b."""

    M: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.M.ndim != 3 or self.b.ndim != 1 or self.M.shape[0] != self.b.shape[0]:
            raise ConfigError(
                f"inconsistent bilinear shapes M{self.M.shape}, b{self.b.shape}"
            )

    @property
    def out_dim(self) -> int:
        return self.M.shape[0]


def init_bilinear(config: FusionConfig, rng: np.random.Generator) -> BilinearParams:
    """Uniform +-sqrt(6/(d_m+d_h)) entries scaled by 1/sqrt(bilinear_dim); zero bias.

    Keeps initial fused magnitudes comparable to the concatenated channels.
    """
    bound = np.sqrt(6.0 / (config.d_m + config.d_h)) / np.sqrt(config.bilinear_dim)
    M = rng.uniform(-bound, bound, size=(config.bilinear_dim, config.d_m, config.d_h))
    b = np.zeros(config.bilinear_dim)
    return BilinearParams(M=M, b=b)


def _check_bilinear_shapes(m: np.ndarray, h: np.ndarray, params: BilinearParams) -> None:
    if m.shape != (params.M.shape[1],) or h.shape != (params.M.shape[2],):
        raise ConfigError(
            f"bilinear shape mismatch: m{m.shape}, h{h.shape} vs M{params.M.shape}"
        )


def bilinear_fuse(m: np.ndarray, h: np.ndarray, params: BilinearParams) -> np.ndarray:
    """out[i] = sum_jk m[j] * M[i,j,k] * h[k] + b[i]."""
    m = np.asarray(m, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    _check_bilinear_shapes(m, h, params)
    return np.einsum("j,ijk,k->i", m, params.M, h) + params.b


def bilinear_fuse_batch(M_rows: np.ndarray, H_rows: np.ndarray, params: BilinearParams) -> np.ndarray:
    """Row-wise bilinear fusion for (n, d_m) and (n, d_h) matrices."""
    # einsum over the batch keeps a fixed summation order, so results are
    # reproducible and identical to the per-row path.
    return np.einsum("bj,ijk,bk->bi", M_rows, params.M, H_rows) + params.b


def bilinear_backward(
    m: np.ndarray,
    h: np.ndarray,
    params: BilinearParams,
    grad_out: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of ``grad_out . bilinear_fuse(m, h)`` w.r.t. (m, h, M, b)."""
    m = np.asarray(m, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    g = np.asarray(grad_out, dtype=np.float64)
    _check_bilinear_shapes(m, h, params)
    if g.shape != (params.out_dim,):
        raise ConfigError(f"upstream gradient shape {g.shape} != ({params.out_dim},)")
    d_m = np.einsum("i,ijk,k->j", g, params.M, h)
    d_h = np.einsum("i,ijk,j->k", g, params.M, m)
    d_M = np.einsum("i,j,k->ijk", g, m, h)
    d_b = g.copy()
    return d_m, d_h, d_M, d_b


def bilinear_backward_batch(
    M_rows: np.ndarray,
    H_rows: np.ndarray,
    params: BilinearParams,
    grad_out: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Summed (d_M, d_b) over a batch; inputs are constants during training."""
    d_M = np.einsum("bi,bj,bk->ijk", grad_out, M_rows, H_rows)
    d_b = grad_out.sum(axis=0)
    return d_M, d_b


def sentiment_feature(s_t: np.ndarray | None, s_v: np.ndarray | None) -> np.ndarray:
    """[s_t ; s_v ; s_t + s_v] -- both logit vectors plus their elementwise sum."""
    if s_t is None or s_v is None:
        raise ConfigError("sentiment fusion requires both senti_t and senti_v")
    s_t = np.asarray(s_t, dtype=np.float64)
    s_v = np.asarray(s_v, dtype=np.float64)
    if s_t.shape != s_v.shape or s_t.ndim != 1:
        raise ConfigError(f"sentiment logit shapes differ: {s_t.shape} vs {s_v.shape}")
    return np.concatenate([s_t, s_v, s_t + s_v])


def _require_channel(record: EmbeddingRecord, name: str) -> np.ndarray:
    value = record.channel(name)
    if value is None:
        raise DataError(f"record '{record.id}' is missing required channel '{name}'")
    return value


def assemble(
    record: EmbeddingRecord,
    config: FusionConfig,
    params: BilinearParams | None = None,
) -> np.ndarray:
    """Build the fused feature vector for one record under ``config``.

    Raises:
        DataError: the record lacks a channel the mode requires (named).
        ConfigError: params missing for a bilinear mode, or dims mismatch.
    """
    e_m = _require_channel(record, "mm")
    if e_m.shape != (config.d_m,):
        raise DataError(
            f"record '{record.id}': mm dim {e_m.shape[0]} != configured d_m {config.d_m}"
        )
    parts = [e_m]
    if config.uses_caption:
        h = _require_channel(record, "cap")
        if h.shape != (config.d_h,):
            raise DataError(
                f"record '{record.id}': cap dim {h.shape[0]} != configured d_h {config.d_h}"
            )
        parts.append(h)
        if config.uses_bilinear:
            if params is None:
                raise ConfigError(f"mode '{config.mode}' requires bilinear params")
            parts.append(bilinear_fuse(e_m, h, params))
    if config.uses_sentiment:
        s_t = _require_channel(record, "senti_t")
        s_v = _require_channel(record, "senti_v")
        if s_t.shape != (config.k,) or s_v.shape != (config.k,):
            raise DataError(
                f"record '{record.id}': sentiment dims {s_t.shape[0]}/{s_v.shape[0]} "
                f"!= configured k {config.k}"
            )
        parts.append(sentiment_feature(s_t, s_v))
    return np.concatenate(parts)
