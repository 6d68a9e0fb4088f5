"""Report figures rendered straight to PNG files (Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evalkit import ConfusionMatrix, EvalReport  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def confusion_png(cm: ConfusionMatrix, path, title: str = "confusion matrix") -> Path:
    counts = np.asarray(cm.counts)
    cols = [str(c) for c in cm.classes]
    if counts[:, -1].any():
        cols.append("unmapped")
    else:
        counts = counts[:, :-1]
    with plt.rc_context(STYLE):
        size = max(3.0, 0.55 * len(cols) + 1.5)
        fig, ax = plt.subplots(figsize=(size, size * 0.85))
        im = ax.imshow(counts, cmap="Blues")
        ax.set_xticks(range(len(cols)), cols, rotation=45, ha="right")
        ax.set_yticks(range(len(cm.classes)), [str(c) for c in cm.classes])
        ax.set_xlabel("predicted")
        ax.set_ylabel("true")
        ax.set_title(title)
        hi = counts.max() if counts.size else 0
        for (i, j), v in np.ndenumerate(counts):
            ax.text(j, i, str(v), ha="center", va="center", fontsize=7,
                    color="white" if hi and v > 0.6 * hi else "black")
        fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
        return _save(fig, path)


def per_class_png(report: EvalReport, path, title: Optional[str] = None) -> Path:
    names = list(report.per_class)
    metrics = ("precision", "recall", "f1")
    x = np.arange(len(names))
    width = 0.26
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(names) + 2), 3.0))
        for i, m in enumerate(metrics):
            ax.bar(x + (i - 1) * width, [report.per_class[n][m] for n in names], width, label=m)
        ax.set_xticks(x, names, rotation=30, ha="right")
        ax.set_ylim(0, 1.05)
        ax.set_title(title or f"per-class metrics, accuracy {report.accuracy:.3f}")
        ax.legend(frameon=False, ncols=3, loc="lower right")
        return _save(fig, path)


def accuracy_png(accuracies: Mapping[str, float], path, title: str = "accuracy by evaluation set") -> Path:
    """Bar per evaluation set, in the mapping's order."""
    names = list(accuracies)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(4.0, 0.7 * len(names) + 1.5), 3.0))
        bars = ax.bar(names, [accuracies[n] for n in names], color="0.45")
        ax.bar_label(bars, fmt="%.3f", fontsize=7)
        ax.set_ylim(0, 1.1)
        ax.set_ylabel("accuracy")
        ax.set_title(title)
        return _save(fig, path)


def spectrum_png(values, path, sampling_rate_hz: Optional[float] = None, title: str = "FFT magnitude") -> Path:
    v = np.asarray(values, dtype=np.float64)
    half = v[: v.size // 2 + 1]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 2.6))
        if sampling_rate_hz:
            ax.plot(np.arange(half.size) * sampling_rate_hz / v.size, half, lw=0.8)
            ax.set_xlabel("frequency (Hz)")
        else:
            ax.plot(half, lw=0.8)
            ax.set_xlabel("bin")
        ax.set_ylabel("|X| / L")
        ax.set_title(title)
        return _save(fig, path)
