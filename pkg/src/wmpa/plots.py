"""File-based figure rendering for the report commands.

Every function writes one PNG next to the delimited data it illustrates
and returns the path written. The Agg backend is forced before pyplot is
imported so rendering works headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_amplification_plot",
    "save_estimates_plot",
    "save_comparison_plot",
    "save_train_check_plot",
]


def _finite_or_nan(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    return np.where(np.isfinite(arr), arr, np.nan)


def save_amplification_plot(path: str | Path, series: Sequence[dict]) -> Path:
    """Amplified phase vs signal phase: theory curves with simulated points.

    Each entry of ``series`` is a dict with keys ``label``,
    ``theory_theta``, ``theory_kappa`` and optionally ``point_theta``,
    ``point_kappa``, ``point_err``.
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for i, entry in enumerate(series):
        color = f"C{i}"
        ax.plot(
            np.asarray(entry["theory_theta"], dtype=float),
            np.asarray(entry["theory_kappa"], dtype=float),
            color=color,
            lw=1.5,
            label=str(entry["label"]),
        )
        if "point_theta" in entry:
            ax.errorbar(
                np.asarray(entry["point_theta"], dtype=float),
                _finite_or_nan(entry["point_kappa"]),
                yerr=_finite_or_nan(entry.get("point_err")),
                fmt="o",
                ms=4,
                color=color,
                capsize=3,
                lw=1,
            )
    ax.set_xlabel(r"signal phase $\theta$ (rad)")
    ax.set_ylabel(r"amplified phase $\kappa$ (rad)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_estimates_plot(
    path: str | Path,
    theta_true,
    theta_hat,
    theta_err,
) -> Path:
    """Estimated vs true signal phase with error bars and the y = x line."""
    path = Path(path)
    theta_true = np.asarray(theta_true, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    lo = min(0.0, float(np.min(theta_true)))
    hi = float(np.max(theta_true)) * 1.1 if theta_true.size else 1.0
    ax.plot([lo, hi], [lo, hi], "k--", lw=1, label="ideal")
    ax.errorbar(
        theta_true,
        _finite_or_nan(theta_hat),
        yerr=_finite_or_nan(theta_err),
        fmt="o",
        ms=4,
        capsize=3,
        lw=1,
        label="estimates",
    )
    ax.set_xlabel(r"true signal phase $\theta$ (rad)")
    ax.set_ylabel(r"estimated signal phase $\hat\theta$ (rad)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_comparison_plot(
    path: str | Path,
    amplified_theta_hats,
    conventional_theta_hats,
    theta_true: float,
) -> Path:
    """Histograms of per-seed estimates for the two readout strategies."""
    path = Path(path)
    amplified = _finite_or_nan(amplified_theta_hats)
    conventional = _finite_or_nan(conventional_theta_hats)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    both = np.concatenate([amplified, conventional])
    both = both[np.isfinite(both)]
    bins = np.histogram_bin_edges(both, bins=30) if both.size else 30
    ax.hist(amplified, bins=bins, alpha=0.6, label="amplified")
    ax.hist(conventional, bins=bins, alpha=0.6, label="conventional")
    ax.axvline(theta_true, color="k", ls="--", lw=1, label=r"true $\theta$")
    ax.set_xlabel(r"estimated signal phase $\hat\theta$ (rad)")
    ax.set_ylabel("runs")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_train_check_plot(
    path: str | Path,
    delta_grid,
    theta_grid,
    fidelity_deficit,
    prob_diff,
) -> Path:
    """Heatmaps of bench-vs-protocol deviations over the (delta, theta) grid.

    ``fidelity_deficit`` and ``prob_diff`` are 2-D arrays indexed
    [i_delta, j_theta].
    """
    path = Path(path)
    delta_grid = np.asarray(delta_grid, dtype=float)
    theta_grid = np.asarray(theta_grid, dtype=float)
    extent = (
        float(theta_grid[0]),
        float(theta_grid[-1]),
        float(delta_grid[0]),
        float(delta_grid[-1]),
    )
    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.2))
    for ax, data, title in (
        (axes[0], fidelity_deficit, "1 - fidelity"),
        (axes[1], prob_diff, "|success prob difference|"),
    ):
        image = ax.imshow(
            np.asarray(data, dtype=float),
            origin="lower",
            aspect="auto",
            extent=extent,
        )
        ax.set_xlabel(r"signal phase $\theta$ (rad)")
        ax.set_ylabel(r"post-selection offset $\delta$ (deg)")
        ax.set_title(title)
        fig.colorbar(image, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
