"""Command-line surface: gen-synth, inspect, train, evaluate, predict.

Exit codes are a stable contract: 0 success, 2 config error, 3 training
error, 4 data validation failure, 5 undefined metric.
"""

from __future__ import annotations

import os

# Cap numeric worker threads before numpy loads so MEMEFUSE_THREADS takes
# effect; BLAS pools read these variables once at import.
_threads = os.environ.get("MEMEFUSE_THREADS")
if _threads and _threads.isdigit() and int(_threads) > 0:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(_var, _threads)

import functools
import sys
from pathlib import Path

import click
import numpy as np

from . import checkpoint as ckpt
from . import report as report_mod
from . import synth as synth_mod
from .config import load_run_config
from .errors import ConfigError, DataError, MemefuseError
from .fusion import FusionConfig
from .metrics import evaluate_scores
from .model import batch_from_records
from .store import Dataset, load_dataset_dir
from .training import train as run_training


def _fail(exc: MemefuseError) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(exc.exit_code)


def handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            _check_thread_env()
            return func(*args, **kwargs)
        except MemefuseError as exc:
            _fail(exc)

    return wrapper


def _check_thread_env() -> None:
    value = os.environ.get("MEMEFUSE_THREADS")
    if value is None:
        return
    if not value.isdigit() or int(value) < 1:
        raise ConfigError(f"MEMEFUSE_THREADS must be a positive integer, got '{value}'")


@click.group()
def main():
    """Late-fusion meme classifier: generate data, train, evaluate, predict."""


@main.command("gen-synth")
@click.option("--config", "config_path", required=True, type=click.Path(), help="Run config (TOML).")
@click.option("--seed", type=int, default=None, help="Override [synth] seed.")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Override [output] dir.")
@handle_errors
def gen_synth(config_path, seed, out_dir):
    """Generate a synthetic dataset into the [dataset] directory."""
    run_cfg = load_run_config(config_path)
    target = Path(out_dir) if out_dir else (run_cfg.dataset_dir or run_cfg.output_dir)
    if target is None:
        raise ConfigError("gen-synth needs a target directory ([dataset] dir or --out)")
    synth_cfg = run_cfg.make_synth_config(seed_override=seed)
    dataset = synth_mod.generate(synth_cfg)
    dataset.write(target)
    report = synth_mod.describe_dir(target)
    click.echo(report.to_text())
    click.echo(f"dataset written to {target}")


@main.command("inspect")
@click.argument("dataset_dir", type=click.Path())
@handle_errors
def inspect(dataset_dir):
    """Validate a dataset directory and print its composition."""
    report = synth_mod.describe_dir(dataset_dir)
    click.echo(report.to_text())
    click.echo("dataset OK")


def _resolve_fusion_config(run_cfg, dataset: Dataset) -> FusionConfig:
    fusion = dict(run_cfg.fusion)
    mode = fusion.get("mode")
    if mode is None:
        raise ConfigError("[fusion] section must set a mode")
    dims = dataset.dims
    if "mm" not in dims:
        raise DataError("dataset has no 'mm' channel file")
    kwargs = {"mode": mode, "d_m": dims["mm"]}
    probe = FusionConfig(mode=mode)
    if probe.uses_caption:
        if "cap" not in dims:
            raise DataError("fusion mode requires channel 'cap' but the dataset lacks it")
        kwargs["d_h"] = dims["cap"]
    if probe.uses_sentiment:
        for name in ("senti_t", "senti_v"):
            if name not in dims:
                raise DataError(f"fusion mode requires channel '{name}' but the dataset lacks it")
        if dims["senti_t"] != dims["senti_v"]:
            raise DataError(
                f"sentiment channel dims differ: senti_t={dims['senti_t']}, senti_v={dims['senti_v']}"
            )
        kwargs["k"] = dims["senti_t"]
        if "k" in fusion and fusion["k"] != dims["senti_t"]:
            raise DataError(
                f"configured k={fusion['k']} does not match sentiment channel dim {dims['senti_t']}"
            )
    if "bilinear_dim" in fusion:
        kwargs["bilinear_dim"] = fusion["bilinear_dim"]
    return FusionConfig(**kwargs)


@main.command("train")
@click.option("--config", "config_path", required=True, type=click.Path(), help="Run config (TOML).")
@click.option("--seed", type=int, default=None, help="Override [train] seed.")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Override [output] dir.")
@handle_errors
def train(config_path, seed, out_dir):
    """Train a model and write checkpoint, epoch log and training curves."""
    run_cfg = load_run_config(config_path)
    target = Path(out_dir) if out_dir else run_cfg.output_dir
    if target is None:
        raise ConfigError("train needs an output directory ([output] dir or --out)")
    if run_cfg.dataset_dir is None:
        raise ConfigError("train needs a [dataset] dir")
    dataset = load_dataset_dir(run_cfg.dataset_dir)
    fusion_cfg = _resolve_fusion_config(run_cfg, dataset)
    train_cfg = run_cfg.make_train_config(seed_override=seed)

    result = run_training(dataset, fusion_cfg, train_cfg)

    target.mkdir(parents=True, exist_ok=True)
    ckpt.save_checkpoint(target / "checkpoint.mfm", result.model)
    report_mod.write_training_log(target / "train_log.jsonl", result.log)
    report_mod.render_training_curves(result.log, target / "training_curves.png")
    summary = (
        f"mode: {fusion_cfg.mode}\n"
        f"epochs_run: {len(result.log)}\n"
        f"best_epoch: {result.best_epoch}\n"
        f"best_val_auc_roc: {result.best_val_auc:.9f}\n"
    )
    (target / "train_summary.txt").write_text(summary, encoding="utf-8")
    click.echo(summary.rstrip())
    click.echo(f"checkpoint written to {target / 'checkpoint.mfm'}")


def _labeled_split_batch(dataset: Dataset, split: str, config: FusionConfig):
    records = dataset.split(split)
    if not records:
        raise DataError(f"split '{split}' is empty")
    batch = batch_from_records(records, config)
    return records, batch


@main.command("evaluate")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path())
@click.option("--data", "data_dir", required=True, type=click.Path())
@click.option("--split", type=click.Choice(["train", "val", "test"]), default="val")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Directory for report files.")
@click.option("--threshold", type=float, default=0.5, show_default=True)
@handle_errors
def evaluate(checkpoint_path, data_dir, split, out_dir, threshold):
    """Score a checkpoint on one split; print and write the report."""
    model = ckpt.load_checkpoint(checkpoint_path)
    dataset = load_dataset_dir(data_dir)
    records, batch = _labeled_split_batch(dataset, split, model.config)
    if batch.labels is None:
        raise DataError(f"split '{split}' has unlabeled records; cannot evaluate")
    p_hats = model.predict_p(batch)
    report = evaluate_scores(p_hats, batch.labels, threshold=threshold)
    click.echo(report_mod.format_report(report))
    if out_dir:
        paths = report_mod.write_eval_outputs(out_dir, report, split)
        click.echo(f"report files written to {Path(out_dir)}")
        for name, p in paths.items():
            click.echo(f"  {name}: {p.name}")


@main.command("predict")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path())
@click.option("--data", "data_dir", required=True, type=click.Path())
@click.option("--split", type=click.Choice(["train", "val", "test"]), default="test")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Also write rows to a file.")
@click.option("--threshold", type=float, default=0.5, show_default=True)
@handle_errors
def predict(checkpoint_path, data_dir, split, out_path, threshold):
    """Emit one `id,p_hat,label_hat` row per record, in manifest order."""
    model = ckpt.load_checkpoint(checkpoint_path)
    dataset = load_dataset_dir(data_dir)
    records, batch = _labeled_split_batch(dataset, split, model.config)
    p_hats = model.predict_p(batch)
    lines = [
        f"{rec.id},{p:.9f},{int(p >= threshold)}"
        for rec, p in zip(records, p_hats)
    ]
    text = "\n".join(lines)
    click.echo(text)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
