"""Classifier head mathematics: MLP forward/backward and the two losses.

The head is an MLP with ReLU hidden layers and a 2-logit softmax output
(default: one 768-unit hidden layer). All gradients are hand-derived
reverse mode; every path is cross-checked against central finite
differences in the test suite.

The two loss formulations coincide under the 2-logit head: softmax cross
entropy on logits (0, z) equals binary cross entropy on sigmoid(z). Both
are implemented and the identity is enforced as a test invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .fusion import (
    BilinearParams,
    FusionConfig,
    bilinear_backward_batch,
    bilinear_fuse_batch,
    feature_dim,
)

PROB_EPS = 1e-12  # probability clip so log terms stay total


@dataclass
class MlpParams:
    """Weight matrices (out x in) and bias vectors, input to output order."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ConfigError("weights and biases must be non-empty and aligned")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ConfigError(f"layer {i}: weight {w.shape} and bias {b.shape} mismatch")
            if i > 0 and w.shape[1] != self.weights[i - 1].shape[0]:
                raise ConfigError(f"layer {i}: input width does not chain from layer {i - 1}")

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init_mlp(dims: list[int], rng: np.random.Generator) -> MlpParams:
    """Glorot-uniform weights, zero biases, for the layer widths in ``dims``."""
    if len(dims) < 2:
        raise ConfigError("an MLP needs at least input and output widths")
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def mlp_forward_batch(X: np.ndarray, params: MlpParams) -> tuple[np.ndarray, list[np.ndarray]]:
    """Forward pass over a batch.

    Returns (logits, cache) where cache holds the layer inputs needed by
    :func:`mlp_backward_batch`. Hidden activations are ReLU; the final
    layer is linear (its softmax lives in the loss).
    """
    if X.ndim != 2 or X.shape[1] != params.input_dim:
        raise ConfigError(f"input shape {X.shape} incompatible with MLP input {params.input_dim}")
    cache = [X]
    a = X
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        if i < len(params.weights) - 1:
            a = _relu(z)
            cache.append(a)
        else:
            a = z
    return a, cache


def mlp_forward(x: np.ndarray, params: MlpParams) -> tuple[np.ndarray, list[np.ndarray]]:
    """Single-example forward pass; returns (logits 2-vector, cache)."""
    logits, cache = mlp_forward_batch(np.asarray(x, dtype=np.float64)[None, :], params)
    return logits[0], cache


def mlp_backward_batch(
    grad_logits: np.ndarray,
    params: MlpParams,
    cache: list[np.ndarray],
) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
    """Reverse-mode gradients summed over the batch.

    Returns (d_weights, d_biases, d_input). The ReLU subgradient at 0 is 0.
    """
    d_weights = [np.zeros_like(w) for w in params.weights]
    d_biases = [np.zeros_like(b) for b in params.biases]
    g = grad_logits
    for i in range(len(params.weights) - 1, -1, -1):
        a_in = cache[i]
        d_weights[i] = g.T @ a_in
        d_biases[i] = g.sum(axis=0)
        if i > 0:
            g = (g @ params.weights[i]) * (cache[i] > 0.0)
    d_input = g @ params.weights[0]
    return d_weights, d_biases, d_input


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax (max subtraction)."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_ce(logits: np.ndarray, y: int) -> float:
    """-log softmax(logits)[y], computed stably for a single example."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.shape != (2,):
        raise ConfigError(f"expected a 2-vector of logits, got shape {logits.shape}")
    if y not in (0, 1):
        raise ConfigError(f"label must be 0 or 1, got {y}")
    z = logits - logits.max()
    return float(np.log(np.exp(z).sum()) - z[y])


def softmax_ce_batch(logits: np.ndarray, ys: np.ndarray) -> tuple[float, np.ndarray]:
    """Summed cross-entropy over a batch plus per-example logit gradients.

    The gradient of the summed loss w.r.t. logits is softmax - onehot, so a
    batch gradient is exactly the sum of per-example gradients.
    """
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    losses = log_norm - z[np.arange(len(ys)), ys]
    grad = softmax(logits)
    grad[np.arange(len(ys)), ys] -= 1.0
    return float(losses.sum()), grad


def bce_loss(p_hats, ys) -> float:
    """Sum of -(y log p + (1-y) log(1-p)) with p clipped to [eps, 1-eps]."""
    p = np.asarray(p_hats, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if p.shape != y.shape:
        raise ConfigError(f"length mismatch: {p.shape} probabilities vs {y.shape} labels")
    p = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    return float(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)).sum())


def bce_loss_mean(p_hats, ys) -> float:
    """Per-example mean of :func:`bce_loss`, for logging."""
    p = np.asarray(p_hats, dtype=np.float64)
    if p.size == 0:
        raise ConfigError("cannot average a loss over zero examples")
    return bce_loss(p_hats, ys) / p.size


@dataclass
class Prediction:
    """Logits with the derived class-1 probability and hard label."""

    logits: np.ndarray
    p_hat: float
    label_hat: int

    @classmethod
    def from_logits(cls, logits: np.ndarray, threshold: float = 0.5) -> "Prediction":
        p_hat = float(softmax(np.asarray(logits, dtype=np.float64))[1])
        return cls(logits=np.asarray(logits), p_hat=p_hat, label_hat=int(p_hat >= threshold))


@dataclass
class ChannelBatch:
    """Per-split channel matrices aligned by row; optional ones may be None."""

    e_m: np.ndarray
    h: np.ndarray | None = None
    s_t: np.ndarray | None = None
    s_v: np.ndarray | None = None
    ids: list[str] = field(default_factory=list)
    labels: np.ndarray | None = None

    def take(self, idx: np.ndarray) -> "ChannelBatch":
        return ChannelBatch(
            e_m=self.e_m[idx],
            h=None if self.h is None else self.h[idx],
            s_t=None if self.s_t is None else self.s_t[idx],
            s_v=None if self.s_v is None else self.s_v[idx],
            ids=[self.ids[i] for i in idx] if self.ids else [],
            labels=None if self.labels is None else self.labels[idx],
        )

    def __len__(self) -> int:
        return self.e_m.shape[0]


def batch_from_records(records, config: FusionConfig) -> ChannelBatch:
    """Stack the channels ``config`` needs from a list of EmbeddingRecords."""
    if not records:
        raise DataError("cannot build a batch from zero records")

    def stack(channel: str, dim: int) -> np.ndarray:
        rows = []
        for r in records:
            v = r.channel(channel)
            if v is None:
                raise DataError(f"record '{r.id}' is missing required channel '{channel}'")
            if v.shape != (dim,):
                raise DataError(
                    f"record '{r.id}': channel '{channel}' dim {v.shape[0]} != expected {dim}"
                )
            rows.append(v)
        return np.stack(rows)

    labels = None
    if all(r.label is not None for r in records):
        labels = np.array([r.label for r in records], dtype=np.int64)
    return ChannelBatch(
        e_m=stack("mm", config.d_m),
        h=stack("cap", config.d_h) if config.uses_caption else None,
        s_t=stack("senti_t", config.k) if config.uses_sentiment else None,
        s_v=stack("senti_v", config.k) if config.uses_sentiment else None,
        ids=[r.id for r in records],
        labels=labels,
    )


@dataclass
class FusionModel:
    """The trainable unit: fusion config, optional bilinear params, MLP head."""

    config: FusionConfig
    mlp: MlpParams
    bilinear: BilinearParams | None = None

    def __post_init__(self):
        if self.config.uses_bilinear and self.bilinear is None:
            raise ConfigError(f"mode '{self.config.mode}' requires bilinear params")
        expected = feature_dim(self.config)
        if self.mlp.input_dim != expected:
            raise ConfigError(
                f"MLP input width {self.mlp.input_dim} != feature dim {expected}"
            )
        if self.mlp.output_dim != 2:
            raise ConfigError("the classifier head must emit 2 logits")

    def parameters(self) -> list[np.ndarray]:
        """Flat parameter list in the fixed (bilinear M, b, W_0, b_0, ...) order."""
        params: list[np.ndarray] = []
        if self.bilinear is not None:
            params.extend([self.bilinear.M, self.bilinear.b])
        for w, b in zip(self.mlp.weights, self.mlp.biases):
            params.extend([w, b])
        return params

    def copy(self) -> "FusionModel":
        bilinear = None
        if self.bilinear is not None:
            bilinear = BilinearParams(self.bilinear.M.copy(), self.bilinear.b.copy())
        return FusionModel(config=self.config, mlp=self.mlp.copy(), bilinear=bilinear)

    def features(self, batch: ChannelBatch) -> np.ndarray:
        """Fused feature matrix for a batch (bilinear part recomputed live)."""
        cfg = self.config
        parts = [batch.e_m]
        if cfg.uses_caption:
            parts.append(batch.h)
            if cfg.uses_bilinear:
                parts.append(bilinear_fuse_batch(batch.e_m, batch.h, self.bilinear))
        if cfg.uses_sentiment:
            parts.extend([batch.s_t, batch.s_v, batch.s_t + batch.s_v])
        return np.concatenate(parts, axis=1)

    def forward(self, batch: ChannelBatch):
        X = self.features(batch)
        logits, cache = mlp_forward_batch(X, self.mlp)
        return logits, cache

    def predict_p(self, batch: ChannelBatch) -> np.ndarray:
        logits, _ = self.forward(batch)
        return softmax(logits)[:, 1]

    def loss_and_grads(self, batch: ChannelBatch, ys: np.ndarray):
        """Summed softmax-CE loss and gradients for every trainable tensor.

        Returns (loss, grads) with grads ordered as :meth:`parameters`.
        """
        logits, cache = self.forward(batch)
        loss, grad_logits = softmax_ce_batch(logits, ys)
        d_ws, d_bs, d_input = mlp_backward_batch(grad_logits, self.mlp, cache)
        grads: list[np.ndarray] = []
        if self.config.uses_bilinear:
            # The bilinear block feeds the feature slice [d_m + d_h, d_m + d_h + bilinear_dim).
            start = self.config.d_m + self.config.d_h
            g_bil = d_input[:, start : start + self.config.bilinear_dim]
            d_M, d_b = bilinear_backward_batch(batch.e_m, batch.h, self.bilinear, g_bil)
            grads.extend([d_M, d_b])
        for d_w, d_b in zip(d_ws, d_bs):
            grads.extend([d_w, d_b])
        return loss, grads
