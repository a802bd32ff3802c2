"""Seeded, reproducible training with early stopping on validation AUCROC.

Given one seed the whole run is bit-deterministic: parameter init, shuffle
order, optimizer state and the retained best parameters. Gradients are
reduced in a fixed order (matrix products over contiguous batches), so two
runs with the same seed produce identical checkpoints and logs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics
from .errors import ConfigError, TrainingError
from .fusion import FusionConfig, feature_dim, init_bilinear
from .model import (
    ChannelBatch,
    FusionModel,
    batch_from_records,
    init_mlp,
    softmax,
    softmax_ce_batch,
)
from .store import Dataset


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-5
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 30
    patience: int = 5
    seed: int = 0
    hidden_dims: tuple[int, ...] = (768,)

    def __post_init__(self):
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"unknown optimizer '{self.optimizer}' (choose sgd or adam)")
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be non-negative")
        for name in ("batch_size", "max_epochs", "patience"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.patience > self.max_epochs:
            raise ConfigError("patience must not exceed max_epochs")
        if any(d < 1 for d in self.hidden_dims):
            raise ConfigError("hidden layer widths must be positive")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")


class Sgd:
    """Plain gradient descent: each step moves a parameter by -lr * grad."""

    def __init__(self, lr: float):
        self.lr = lr

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        for p, g in zip(params, grads):
            p -= self.lr * g


class Adam:
    """Adam with bias correction (Kingma & Ba defaults unless overridden)."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: list[np.ndarray] | None = None
        self._v: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            m_hat = m / (1 - b1**self.t)
            v_hat = v / (1 - b2**self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(config: TrainConfig):
    if config.optimizer == "sgd":
        return Sgd(config.learning_rate)
    return Adam(config.learning_rate, config.beta1, config.beta2, config.eps)


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    train_loss_mean: float
    train_accuracy: float
    val_loss_mean: float
    val_accuracy: float
    val_auc_roc: float

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "train_loss_mean": self.train_loss_mean,
            "train_accuracy": self.train_accuracy,
            "val_loss_mean": self.val_loss_mean,
            "val_accuracy": self.val_accuracy,
            "val_auc_roc": self.val_auc_roc,
        }


@dataclass
class TrainResult:
    model: FusionModel
    log: list[EpochLog]
    best_epoch: int
    best_val_auc: float


def init_model(config: FusionConfig, train_config: TrainConfig, rng: np.random.Generator) -> FusionModel:
    bilinear = init_bilinear(config, rng) if config.uses_bilinear else None
    dims = [feature_dim(config), *train_config.hidden_dims, 2]
    return FusionModel(config=config, mlp=init_mlp(dims, rng), bilinear=bilinear)


def _epoch_stats(model: FusionModel, batch: ChannelBatch, ys: np.ndarray):
    logits, _ = model.forward(batch)
    loss, _ = softmax_ce_batch(logits, ys)
    p_hat = softmax(logits)[:, 1]
    preds = (p_hat >= 0.5).astype(np.int64)
    return loss, float((preds == ys).mean()), p_hat


def train(dataset: Dataset, fusion_config: FusionConfig, train_config: TrainConfig) -> TrainResult:
    """Minimize the summed cross-entropy over the train split.

    Keeps the parameters from the epoch with the best validation AUCROC and
    stops once that metric fails to improve for ``patience`` epochs.

    Raises:
        ConfigError: empty or unlabeled train/val split.
        TrainingError: non-finite loss, reported with epoch and batch.
    """
    train_records = dataset.split("train")
    val_records = dataset.split("val")
    if not train_records or not val_records:
        raise ConfigError("training requires non-empty train and val splits")
    if any(r.label is None for r in train_records + val_records):
        raise ConfigError("training requires labels on every train/val record")

    train_batch = batch_from_records(train_records, fusion_config)
    val_batch = batch_from_records(val_records, fusion_config)
    train_ys = train_batch.labels
    val_ys = val_batch.labels

    rng = np.random.default_rng(train_config.seed)
    model = init_model(fusion_config, train_config, rng)
    optimizer = make_optimizer(train_config)

    n = len(train_batch)
    best = model.copy()
    best_auc = -np.inf
    best_epoch = 0
    epochs_since_best = 0
    log: list[EpochLog] = []

    for epoch in range(1, train_config.max_epochs + 1):
        perm = rng.permutation(n)
        for batch_index, start in enumerate(range(0, n, train_config.batch_size)):
            idx = perm[start : start + train_config.batch_size]
            mini = train_batch.take(idx)
            loss, grads = model.loss_and_grads(mini, train_ys[idx])
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch {batch_index}"
                )
            optimizer.step(model.parameters(), grads)

        train_loss, train_acc, _ = _epoch_stats(model, train_batch, train_ys)
        val_loss, val_acc, val_p = _epoch_stats(model, val_batch, val_ys)
        val_auc = metrics.auc_roc(val_p, val_ys)
        log.append(
            EpochLog(
                epoch=epoch,
                train_loss=train_loss,
                train_loss_mean=train_loss / len(train_batch),
                train_accuracy=train_acc,
                val_loss_mean=val_loss / len(val_batch),
                val_accuracy=val_acc,
                val_auc_roc=val_auc,
            )
        )
        if val_auc > best_auc:
            best_auc = val_auc
            best = model.copy()
            best_epoch = epoch
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= train_config.patience:
                break

    return TrainResult(model=best, log=log, best_epoch=best_epoch, best_val_auc=best_auc)
