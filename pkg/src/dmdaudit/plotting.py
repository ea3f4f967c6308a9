"""Figure rendering for the report paths: lag-sweep diagnostics, eigenvalue
maps, and prediction overlays.  All figures go straight to files; no
interactive backend is touched."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dmd import SpectrumReport
from .embedding import TimeSeries
from .pipeline import SweepReport

__all__ = [
    "save_sweep_figures",
    "save_eigenvalue_figure",
    "save_prediction_figure",
]


def _finalize(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_figures(report: SweepReport, outdir) -> list:
    """P-value, statistic, and condition-number curves against the lag."""
    cols = report.columns()
    lags = np.asarray(cols["lag"], dtype=float)
    written = []

    def curve(key, ylabel, fname, logy=False, alpha_line=None):
        vals = np.array([np.nan if v is None else v for v in cols[key]], dtype=float)
        if np.all(np.isnan(vals)):
            return
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(lags, vals, "o-", ms=3)
        if alpha_line is not None:
            ax.axhline(alpha_line, color="crimson", ls="--", lw=1, label=f"alpha = {alpha_line:g}")
            ax.legend()
        if report.l_star is not None:
            ax.axvline(report.l_star, color="gray", ls=":", lw=1)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel("embedding order L")
        ax.set_ylabel(ylabel)
        ax.grid(alpha=0.3)
        path = outdir / fname
        _finalize(fig, path)
        written.append(path)

    curve("p_value", "causality-gate p-value", "pvalue_vs_lag.png", logy=True, alpha_line=report.alpha)
    curve("statistic", "Wald statistic", "statistic_vs_lag.png", logy=True)
    curve("condition_number", "condition number of the embedding", "cond_vs_lag.png", logy=True)
    curve("test_rmse_mean", "mean test RMSE", "test_rmse_vs_lag.png", logy=True)
    return written


def save_eigenvalue_figure(spectra: dict[int, SpectrumReport], path) -> None:
    """Scatter of model eigenvalues in the complex plane with the unit circle."""
    fig, ax = plt.subplots(figsize=(5, 5))
    theta = np.linspace(0, 2 * np.pi, 400)
    ax.plot(np.cos(theta), np.sin(theta), color="black", lw=1)
    cmap = plt.get_cmap("viridis")
    lags = sorted(spectra)
    for i, lag in enumerate(lags):
        pts = np.array([r.eigenvalue for r in spectra[lag].records])
        color = cmap(i / max(len(lags) - 1, 1))
        ax.scatter(pts.real, pts.imag, s=12, color=color, label=f"L={lag}")
    if len(lags) <= 8:
        ax.legend(fontsize=8)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_aspect("equal")
    ax.grid(alpha=0.3)
    _finalize(fig, path)


def save_prediction_figure(actual: TimeSeries, predicted: np.ndarray, split_index: int, path) -> None:
    """Per-channel overlay of measured and predicted traces.

    ``predicted`` spans the same samples as ``actual``; a vertical marker
    separates the training window from the forecast horizon.
    """
    n = actual.channels
    t = np.arange(actual.samples) * actual.dt
    fig, axes = plt.subplots(n, 1, figsize=(7, 1.6 * n), sharex=True)
    axes = np.atleast_1d(axes)
    for c, ax in enumerate(axes):
        ax.plot(t, actual.data[c], lw=1, label="measured")
        ax.plot(t, predicted[c], lw=1, ls="--", label="model")
        ax.axvline(split_index * actual.dt, color="gray", ls=":", lw=1)
        ax.set_ylabel(actual.labels[c], fontsize=8)
        ax.grid(alpha=0.3)
    axes[0].legend(fontsize=8, loc="upper right")
    axes[-1].set_xlabel("time [s]")
    _finalize(fig, path)
