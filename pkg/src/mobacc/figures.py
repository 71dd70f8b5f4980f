"""Matplotlib renderings of the report data, written next to the CSVs."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from mobacc.fitting import LinearFit
from mobacc.intervals import IntervalFit

DPI = 150


def _save(fig, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def entropy_histogram(labels: Sequence[float], counts: Sequence[int], path: Path | str) -> None:
    """Users per entropy interval."""
    fig, ax = plt.subplots(figsize=(7, 4))
    width = labels[1] - labels[0] if len(labels) > 1 else 0.05
    ax.bar(labels, counts, width=width * 0.9, color="#3b6ea5")
    ax.set_xlabel("entropy interval upper bound (bits)")
    ax.set_ylabel("users")
    ax.set_title("Entropy distribution")
    _save(fig, path)


def accuracy_scatter(s_real: Sequence[float], accuracy: Sequence[float], path: Path | str) -> None:
    """Per-user accuracy against real entropy."""
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(s_real, accuracy, ".", markersize=2, alpha=0.4, color="#3b6ea5")
    ax.set_xlabel("real entropy (bits)")
    ax.set_ylabel("prediction accuracy")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title("Accuracy vs entropy")
    _save(fig, path)


def interval_density_grid(fits: Sequence[IntervalFit], path: Path | str, max_panels: int = 9) -> None:
    """KDE and fitted Gaussian per interval, most-populated intervals first."""
    with_grids = [f for f in fits if f.kde_grid]
    with_grids.sort(key=lambda f: (-f.user_count, f.s))
    chosen = sorted(with_grids[:max_panels], key=lambda f: f.s)
    if not chosen:
        return
    cols = 3
    rows = math.ceil(len(chosen) / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(4 * cols, 3 * rows), squeeze=False)
    for ax in axes.flat:
        ax.set_axis_off()
    for ax, fit in zip(axes.flat, chosen):
        ax.set_axis_on()
        x = np.array([p[0] for p in fit.kde_grid])
        density = np.array([p[1] for p in fit.kde_grid])
        fitted = np.exp(-0.5 * ((x - fit.mu) / fit.sigma) ** 2) / (math.sqrt(2 * math.pi) * fit.sigma)
        ax.plot(x, density, label="KDE", color="#3b6ea5")
        ax.plot(x, fitted, label="Gaussian", color="#c44e52", linestyle="--")
        ax.set_title(f"s = {fit.s:.2f}  ({fit.user_count} users)", fontsize=9)
        ax.set_xlabel("accuracy", fontsize=8)
        ax.set_ylabel("density", fontsize=8)
        ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, path)


def mu_curve(
    points: Sequence[tuple[float, float]],
    fit: LinearFit,
    path: Path | str,
) -> None:
    """Per-interval mean accuracy and its affine fit."""
    s = np.array([p[0] for p in points])
    mu = np.array([p[1] for p in points])
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(s, mu, "o", markersize=4, label="interval mean", color="#3b6ea5")
    xs = np.linspace(s.min(), s.max(), 200)
    ax.plot(xs, fit(xs), label=f"linear: {fit.a:.4f} s + {fit.b:.4f}", color="#c44e52")
    ax.set_xlabel("entropy interval upper bound (bits)")
    ax.set_ylabel("mean accuracy")
    ax.legend()
    ax.set_title("Interval mean vs entropy")
    _save(fig, path)


def sigma_curves(
    points: Sequence[tuple[float, float]],
    candidates: dict,
    selected: str,
    path: Path | str,
) -> None:
    """Per-interval accuracy spread and the candidate fits."""
    s = np.array([p[0] for p in points])
    sigma = np.array([p[1] for p in points])
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(s, sigma, "o", markersize=4, label="interval sd", color="#444444")
    xs = np.linspace(s.min(), s.max(), 300)
    palette = {"polynomial": "#55a868", "gaussian": "#c44e52", "double_gaussian": "#8172b2"}
    for tag, fit in candidates.items():
        suffix = " (selected)" if tag == selected else ""
        ax.plot(xs, fit(xs), label=tag + suffix, color=palette.get(tag))
    ax.set_xlabel("entropy interval upper bound (bits)")
    ax.set_ylabel("accuracy standard deviation")
    ax.legend()
    ax.set_title("Interval spread vs entropy")
    _save(fig, path)


def mse_bars(mses: dict[str, float], selected: str, path: Path | str) -> None:
    """Residual MSE of the spread candidates."""
    tags = list(mses)
    values = [mses[t] for t in tags]
    colors = ["#c44e52" if t == selected else "#3b6ea5" for t in tags]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(tags, values, color=colors)
    ax.set_ylabel("residual MSE")
    ax.set_title("Spread model comparison")
    _save(fig, path)
