"""Report serialization and figure rendering for evaluation and training.

The evaluate path writes a key-value report, the ROC points as CSV rows,
and matplotlib renderings (ROC curve, confusion matrix) next to them. The
train path renders loss/metric curves next to the JSONL epoch log.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import EvalReport
from .training import EpochLog


def format_report(report: EvalReport) -> str:
    """Key-value text form of an EvalReport (confusion given as tn/fp/fn/tp)."""
    c = report.confusion
    lines = [
        f"n: {report.n}",
        f"accuracy: {report.accuracy:.9f}",
        f"auc_roc: {report.auc_roc:.9f}",
        f"threshold: {report.threshold}",
        f"confusion_tn: {int(c[0, 0])}",
        f"confusion_fp: {int(c[0, 1])}",
        f"confusion_fn: {int(c[1, 0])}",
        f"confusion_tp: {int(c[1, 1])}",
    ]
    return "\n".join(lines)


def roc_csv(report: EvalReport) -> str:
    lines = ["fpr,tpr"]
    lines.extend(f"{fpr:.9f},{tpr:.9f}" for fpr, tpr in report.roc_points)
    return "\n".join(lines)


def render_roc(report: EvalReport, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    xs = [p[0] for p in report.roc_points]
    ys = [p[1] for p in report.roc_points]
    ax.plot(xs, ys, marker=".", markersize=3, label=f"AUCROC = {report.auc_roc:.4f}")
    ax.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=1)
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("True positive rate")
    ax.set_title("ROC curve")
    ax.legend(loc="lower right")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_confusion(report: EvalReport, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(4.5, 4))
    ax.imshow(report.confusion, cmap="Blues")
    for i in range(2):
        for j in range(2):
            ax.text(j, i, str(int(report.confusion[i, j])), ha="center", va="center")
    ax.set_xticks([0, 1], ["benign", "hateful"])
    ax.set_yticks([0, 1], ["benign", "hateful"])
    ax.set_xlabel("Predicted")
    ax.set_ylabel("True")
    ax.set_title(f"Confusion matrix (n={report.n})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_eval_outputs(out_dir: str | Path, report: EvalReport, split: str) -> dict[str, Path]:
    """Write report.txt, roc_points.csv and both figures; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out_dir / f"report_{split}.txt",
        "roc_csv": out_dir / f"roc_points_{split}.csv",
        "roc_png": out_dir / f"roc_curve_{split}.png",
        "confusion_png": out_dir / f"confusion_{split}.png",
    }
    paths["report"].write_text(format_report(report) + "\n", encoding="utf-8")
    paths["roc_csv"].write_text(roc_csv(report) + "\n", encoding="utf-8")
    render_roc(report, paths["roc_png"])
    render_confusion(report, paths["confusion_png"])
    return paths


def write_training_log(path: str | Path, log: list[EpochLog]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in log:
            fh.write(json.dumps(entry.to_dict(), sort_keys=True) + "\n")


def render_training_curves(log: list[EpochLog], path: str | Path) -> None:
    epochs = [e.epoch for e in log]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(epochs, [e.train_loss_mean for e in log], label="train")
    ax1.plot(epochs, [e.val_loss_mean for e in log], label="val")
    ax1.set_xlabel("Epoch")
    ax1.set_ylabel("Mean cross-entropy")
    ax1.set_title("Loss")
    ax1.legend()
    ax2.plot(epochs, [e.train_accuracy for e in log], label="train acc")
    ax2.plot(epochs, [e.val_accuracy for e in log], label="val acc")
    ax2.plot(epochs, [e.val_auc_roc for e in log], label="val AUCROC")
    ax2.set_xlabel("Epoch")
    ax2.set_title("Metrics")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
