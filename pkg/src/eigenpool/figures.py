"""Matplotlib rendering of bases, spectra, error tables and bench results.

Figures are rendered with the Agg backend and written atomically with
the default Software metadata suppressed, so identical inputs yield
byte-identical PNG files.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .storage import atomic_write_bytes

__all__ = ["save_basis_figure", "save_error_figure", "save_bench_figure"]

_SAVEFIG_KW = {"dpi": 120, "metadata": {"Software": None}}


def _save(fig, path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", **_SAVEFIG_KW)
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def save_basis_figure(basis, path) -> None:
    """Weight columns over time, plus cumulative energy when available."""
    has_spectrum = basis.eigenvalues is not None and np.sum(basis.eigenvalues) > 0
    ncols = 2 if has_spectrum else 1
    fig, axes = plt.subplots(1, ncols, figsize=(5.0 * ncols, 3.6))
    axes = np.atleast_1d(axes)
    steps = np.arange(1, basis.length + 1)
    for j in range(basis.count):
        axes[0].plot(steps, basis.vectors[:, j], label=f"{basis.source} {j + 1}")
    axes[0].set_xlabel("time step")
    axes[0].set_ylabel("weight")
    axes[0].legend(fontsize=8)
    axes[0].set_title(f"{basis.source} basis functions (L={basis.length})")
    if has_spectrum:
        energy = np.cumsum(basis.eigenvalues) / np.sum(basis.eigenvalues)
        axes[1].plot(np.arange(1, energy.size + 1), energy, marker="o", ms=3)
        axes[1].set_xlabel("number of basis functions")
        axes[1].set_ylabel("cumulative energy")
        axes[1].set_ylim(0.0, 1.05)
        axes[1].set_title("eigenvalue energy")
    fig.tight_layout()
    _save(fig, path)


def save_error_figure(ks, errors, tails, path) -> None:
    """Reconstruction error against the eigenvalue tail per basis size."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(ks, errors, marker="o", ms=4, label="reconstruction error")
    ax.plot(ks, tails, marker="x", ms=5, linestyle="--", label="eigenvalue tail")
    positive = [v for v in list(errors) + list(tails) if v > 0]
    if positive:
        ax.set_yscale("log")
        ax.set_ylim(bottom=min(positive) * 0.5)
    ax.set_xlabel("number of basis functions")
    ax.set_ylabel("total squared error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def save_bench_figure(report, path) -> None:
    """Accuracy bar chart for a benchmark report."""
    tags = list(report.accuracies)
    values = [report.accuracies[t] for t in tags]
    fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(tags), 3.6))
    ax.bar(range(len(tags)), values)
    ax.set_xticks(range(len(tags)))
    ax.set_xticklabels(tags, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("accuracy")
    ax.set_title(f"{report.spec.generator} dataset, nearest centroid")
    fig.tight_layout()
    _save(fig, path)
