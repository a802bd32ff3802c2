"""Run configuration files: TOML with strictly validated sections.

A run config drives gen-synth and train. Sections:

- ``[synth]``    fields of SynthConfig (``mix`` as an inline table)
- ``[dataset]``  ``dir`` pointing at a dataset directory
- ``[fusion]``   ``mode`` plus optional ``bilinear_dim``/``k`` override
                 (d_m/d_h come from the channel file headers)
- ``[train]``    fields of TrainConfig
- ``[output]``   ``dir`` for checkpoints, logs, reports, figures
- ``[metrics]``  ``threshold`` for the hard decision

Unknown sections or keys are rejected so typos cannot silently fall back
to defaults.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .fusion import MODES
from .synth import DEFAULT_MIX, MEME_TYPES, SynthConfig
from .training import TrainConfig

_SYNTH_KEYS = {"n", "seed", "d_m", "d_h", "k", "mix", "noise_sigma", "split_fractions"}
_FUSION_KEYS = {"mode", "bilinear_dim", "k"}
_TRAIN_KEYS = {
    "learning_rate",
    "optimizer",
    "beta1",
    "beta2",
    "eps",
    "batch_size",
    "max_epochs",
    "patience",
    "seed",
    "hidden_dims",
}
_SECTION_KEYS = {
    "synth": _SYNTH_KEYS,
    "dataset": {"dir"},
    "fusion": _FUSION_KEYS,
    "train": _TRAIN_KEYS,
    "output": {"dir"},
    "metrics": {"threshold"},
}


def _reject_unknown(section: str, table: Mapping[str, Any]) -> None:
    allowed = _SECTION_KEYS[section]
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in [{section}] section")


@dataclass
class RunConfig:
    """Parsed and validated contents of a run config file."""

    path: Path
    synth: dict[str, Any]
    dataset_dir: Path | None
    fusion: dict[str, Any]
    train: dict[str, Any]
    output_dir: Path | None
    threshold: float

    def make_synth_config(self, seed_override: int | None = None) -> SynthConfig:
        kwargs = dict(self.synth)
        if "split_fractions" in kwargs:
            kwargs["split_fractions"] = tuple(kwargs["split_fractions"])
        if seed_override is not None:
            kwargs["seed"] = seed_override
        return SynthConfig(**kwargs)

    def make_train_config(self, seed_override: int | None = None) -> TrainConfig:
        kwargs = dict(self.train)
        if "hidden_dims" in kwargs:
            kwargs["hidden_dims"] = tuple(kwargs["hidden_dims"])
        if seed_override is not None:
            kwargs["seed"] = seed_override
        return TrainConfig(**kwargs)


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc

    for section in raw:
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}] in {path}")
        if not isinstance(raw[section], dict):
            raise ConfigError(f"[{section}] must be a table")
        _reject_unknown(section, raw[section])

    synth = dict(raw.get("synth", {}))
    if "mix" in synth:
        mix = synth["mix"]
        if not isinstance(mix, dict):
            raise ConfigError("[synth] mix must be a table of proportions")
        for key in mix:
            if key not in MEME_TYPES:
                raise ConfigError(f"unknown meme type '{key}' in [synth] mix")
        full = dict(DEFAULT_MIX)
        full.update(mix)
        synth["mix"] = full

    fusion = dict(raw.get("fusion", {}))
    if "mode" in fusion and fusion["mode"] not in MODES:
        raise ConfigError(f"unknown fusion mode '{fusion['mode']}' (choose from {MODES})")

    dataset_dir = None
    if "dataset" in raw and "dir" in raw["dataset"]:
        dataset_dir = Path(raw["dataset"]["dir"])
        if not dataset_dir.is_absolute():
            dataset_dir = path.parent / dataset_dir

    output_dir = None
    if "output" in raw and "dir" in raw["output"]:
        output_dir = Path(raw["output"]["dir"])
        if not output_dir.is_absolute():
            output_dir = path.parent / output_dir

    threshold = raw.get("metrics", {}).get("threshold", 0.5)
    if not isinstance(threshold, (int, float)) or not 0.0 < float(threshold) < 1.0:
        raise ConfigError("metrics threshold must be a number strictly between 0 and 1")

    return RunConfig(
        path=path,
        synth=synth,
        dataset_dir=dataset_dir,
        fusion=fusion,
        train=dict(raw.get("train", {})),
        output_dir=output_dir,
        threshold=float(threshold),
    )
