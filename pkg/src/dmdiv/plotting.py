"""SVG figures for the command-line reports.

Figures are rendered with the Agg backend and a fixed SVG hash salt and
no date metadata, so the same data always produce the same file.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "dmdiv"
_META = {"Date": None}


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def grid_heatmap(alphas, betas, values, path, title: str = "") -> None:
    """Heat map of a divergence over an (alpha, beta) grid; NaN cells stay blank."""
    alphas, betas = sorted(set(alphas)), sorted(set(betas))
    z = np.full((len(betas), len(alphas)), np.nan)
    for (a, b), v in values.items():
        z[betas.index(b), alphas.index(a)] = v
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    shown = np.log10(np.where(z > 0, z, np.nan))
    im = ax.imshow(shown, origin="lower", cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(alphas)), [f"{a:g}" for a in alphas])
    ax.set_yticks(range(len(betas)), [f"{b:g}" for b in betas])
    ax.set_xlabel("alpha")
    ax.set_ylabel("beta")
    fig.colorbar(im, ax=ax, label="log10 D")
    ax.set_title(title)
    _save(fig, path)


def scaling_plot(ns, series: dict[str, list[float]], path, title: str = "") -> None:
    """Log-log runtime against variable count; missing points are NaN."""
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    for name, ys in series.items():
        ys = np.asarray(ys, dtype=float)
        ok = np.isfinite(ys)
        if ok.any():
            ax.plot(np.asarray(ns)[ok], ys[ok], marker="o", label=name)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("number of variables")
    ax.set_ylabel("seconds")
    ax.legend()
    ax.set_title(title)
    _save(fig, path)


def candidate_plot(grid, values: dict[str, list[float]], path, title: str = "") -> None:
    """Divergence to each candidate at every grid point, on a log scale."""
    fig, ax = plt.subplots(figsize=(8.0, 4.0))
    x = np.arange(len(grid))
    width = 0.8 / max(1, len(values))
    for i, (name, ys) in enumerate(values.items()):
        ax.bar(x + (i - (len(values) - 1) / 2) * width, ys, width, label=name)
    ax.set_yscale("log")
    ax.set_xticks(x, [f"({a:g},{b:g})" for a, b in grid], rotation=90, fontsize=7)
    ax.set_xlabel("(alpha, beta)")
    ax.set_ylabel("divergence")
    ax.legend()
    ax.set_title(title)
    _save(fig, path)
