"""Late-fusion multimodal meme classifier.

Trains shallow classifiers over precomputed embedding channels (joint
multimodal vector, encoded machine caption, unimodal sentiment logits)
under five fusion variants, with hand-derived gradients, deterministic
seeded training, and a synthetic confounder generator for desk-scale
verification.
"""

from .errors import ConfigError, DataError, MemefuseError, MetricError, TrainingError
from .fusion import FusionConfig, feature_dim
from .metrics import EvalReport, evaluate_scores
from .store import Dataset, EmbeddingRecord, load_dataset, load_dataset_dir
from .synth import SynthConfig, generate
from .training import TrainConfig, train

__all__ = [
    "ConfigError",
    "DataError",
    "Dataset",
    "EmbeddingRecord",
    "EvalReport",
    "FusionConfig",
    "MemefuseError",
    "MetricError",
    "SynthConfig",
    "TrainConfig",
    "TrainingError",
    "evaluate_scores",
    "feature_dim",
    "generate",
    "load_dataset",
    "load_dataset_dir",
    "train",
]

__version__ = "0.1.0"
