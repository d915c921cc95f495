"""Figures rendered next to the CSV reports. Every function returns PNG bytes."""

from __future__ import annotations

import io

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 100,
    "savefig.dpi": 120,
}


def _png(fig) -> bytes:
    buf = io.BytesIO()
    # no Software/date metadata so reruns produce identical files
    fig.savefig(buf, format="png", bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return buf.getvalue()


def _axes(ncols=1, width=4.0, height=3.0):
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, ncols, figsize=(width * ncols, height), squeeze=False)
    return fig, axes[0]


def rtc_histogram(histogram_rows, n1: int, n2: int) -> bytes:
    with plt.rc_context(STYLE):
        fig, (ax,) = _axes(width=5.0)
        lo = [r[0] for r in histogram_rows]
        width = (histogram_rows[0][1] - histogram_rows[0][0]) if histogram_rows else 1
        ax.bar(lo, [r[2] for r in histogram_rows], width=width, align="edge",
               color="0.6", edgecolor="0.3", linewidth=0.5)
        for x, name in ((n1, "n1"), (n2, "n2")):
            ax.axvline(x, color="C3", ls="--", lw=1)
            ax.text(x, ax.get_ylim()[1], f" {name}={x}", color="C3", va="top", fontsize=7)
        ax.set_xlabel("reflection-trigger count")
        ax.set_ylabel("rollouts")
        ax.set_title("RTC distribution")
        return _png(fig)


def accuracy_by_rtc(accuracy_rows) -> bytes:
    with plt.rc_context(STYLE):
        fig, (ax,) = _axes(width=5.0)
        labels = [f"{r[0]}-{r[1]}" for r in accuracy_rows]
        ax.plot(range(len(labels)), [r[4] for r in accuracy_rows], marker="o", color="C0")
        ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right")
        ax.set_ylim(-0.02, 1.02)
        ax.set_xlabel("RTC interval")
        ax.set_ylabel("accuracy")
        ax.set_title("Accuracy by reflection count")
        return _png(fig)


def correctness_split(split_rows) -> bytes:
    """Mean length and mean RTC per dataset, correct vs incorrect rollouts."""
    with plt.rc_context(STYLE):
        fig, axes = _axes(ncols=2)
        names = [r[0] for r in split_rows]
        xs = range(len(names))
        for ax, (ci, ii, label) in zip(axes, ((3, 6, "mean length"), (2, 5, "mean RTC"))):
            ax.bar([x - 0.2 for x in xs], [r[ci] or 0 for r in split_rows], 0.4, label="correct",
                   color="C2")
            ax.bar([x + 0.2 for x in xs], [r[ii] or 0 for r in split_rows], 0.4, label="incorrect",
                   color="C3")
            ax.set_xticks(list(xs), names, rotation=30, ha="right")
            ax.set_ylabel(label)
        axes[0].legend()
        return _png(fig)


def training_curves(trace, window: int = 25) -> bytes:
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(8, 5.5), sharex=True)
        steps = [r.step for r in trace.records]
        ax = axes[0, 0]
        for k, name in enumerate(trace.archetype_names):
            ax.plot(steps, [r.probs[k] for r in trace.records], label=name, lw=1)
        ax.set_ylabel("policy probability")
        ax.legend()
        for ax, attr, label in ((axes[0, 1], "accuracy", "accuracy"),
                                (axes[1, 0], "mean_len", "mean length"),
                                (axes[1, 1], "mean_rtc", "mean RTC")):
            ys = trace.series(attr)
            ax.plot(steps, ys, lw=0.5, color="0.7")
            if len(ys) >= window:
                smooth = np.convolve(ys, np.ones(window) / window, mode="valid")
                ax.plot(steps[window - 1:], smooth, lw=1.2, color="C0",
                        label=f"{window}-step mean")
            ax.set_ylabel(label)
        for ax in axes[1]:
            ax.set_xlabel("step")
        fig.tight_layout()
        return _png(fig)
