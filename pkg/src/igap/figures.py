"""Matplotlib rendering of metric results to PNG bytes.

Only the report command renders images; metric commands emit data files.
Figures are returned as encoded bytes so callers can write them with the
same atomic file discipline as text artifacts.
"""

from __future__ import annotations

import io
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import DecompositionReport, IGapCurve
from .report import decompose_series


def _encode(fig) -> bytes:
    buffer = io.BytesIO()
    fig.savefig(buffer, format="png", dpi=150, bbox_inches="tight")
    plt.close(fig)
    return buffer.getvalue()


def _plot_series(
    ax, series: Sequence[tuple[str, Sequence[tuple[float, float | None]]]], percent: bool
) -> None:
    scale = 100.0 if percent else 1.0
    for name, points in series:
        xs = np.array([x for x, _ in points], dtype=float)
        ys = np.array(
            [np.nan if y is None else y * scale for _, y in points], dtype=float
        )
        ax.plot(xs, ys, marker="o", markersize=3, linewidth=1.2, label=name)


def components_figure(
    title: str, reports: Sequence[DecompositionReport], percent: bool = False
) -> bytes:
    """Decomposition components (and transfer gap when present) vs step."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    _plot_series(ax, decompose_series(reports), percent)
    ax.set_xlabel("training step")
    ax.set_ylabel("error (%)" if percent else "error")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7, ncol=2)
    return _encode(fig)


def curve_figure(
    title: str,
    curves: Sequence[tuple[str, IGapCurve]],
    percent: bool = False,
) -> bytes:
    """IGap vs target training error, swept downward; holes break the line."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    series = [
        (name, [(p.e_prime, p.value) for p in curve.points])
        for name, curve in curves
    ]
    _plot_series(ax, series, percent)
    ax.set_xlabel("target training error")
    ax.set_ylabel("igap (%)" if percent else "igap")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.invert_xaxis()
    ax.legend(fontsize=8)
    return _encode(fig)
