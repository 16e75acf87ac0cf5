"""Figure rendering for the plot-data pipeline.

Each renderer takes the same column data that goes into the CSV and writes
a PNG next to it.  Headless backend; nothing interactive.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_pathloss(columns: dict[str, "np.ndarray"], path: str | Path) -> None:
    """Loss versus altitude: measured trace, trend, fitted and reference models."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    alt = columns["altitude_m"]
    ax.plot(alt, columns["loss_db"], lw=0.4, color="0.6", label="trace")
    ax.plot(alt, columns["trend_db"], lw=1.5, color="C0", label="trend (40 wl window)")
    ax.plot(alt, columns["fit_db"], lw=1.5, color="C3", label="altitude model fit")
    if "fspl_db" in columns:
        ax.plot(alt, columns["fspl_db"], lw=1.0, ls="--", color="C2", label="free space")
    if "uma_db" in columns:
        ax.plot(alt, columns["uma_db"], lw=1.0, ls=":", color="C4", label="3GPP UMa")
    ax.set_xlabel("UAV altitude (m)")
    ax.set_ylabel("propagation loss (dB)")
    ax.invert_yaxis()
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_pdf(blocks: dict[str, dict[str, "np.ndarray"]], path: str | Path) -> None:
    """Shadow-fading histograms with their Gaussian fits, one panel per condition."""
    fig, axes = plt.subplots(1, max(len(blocks), 1), figsize=(4.5 * max(len(blocks), 1), 3.6), squeeze=False)
    for ax, (cond, cols) in zip(axes[0], sorted(blocks.items())):
        width = cols["x"][1] - cols["x"][0] if len(cols["x"]) > 1 else 1.0
        ax.bar(cols["x"], cols["empirical"], width=width * 0.9, color="0.7", label="empirical")
        ax.plot(cols["x"], cols["fitted"], color="C3", lw=1.5, label="Gaussian fit")
        ax.set_title(cond.upper())
        ax.set_xlabel("shadow fading (dB)")
        ax.set_ylabel("density")
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_cdf(blocks: dict[str, dict[str, "np.ndarray"]], path: str | Path) -> None:
    """Fast-fading envelope CDFs: empirical plus each fitted family."""
    fig, axes = plt.subplots(1, max(len(blocks), 1), figsize=(4.5 * max(len(blocks), 1), 3.6), squeeze=False)
    for ax, (cond, cols) in zip(axes[0], sorted(blocks.items())):
        x = cols["x"]
        if "empirical" in cols:
            ax.plot(x, cols["empirical"], color="k", lw=1.5, label="empirical")
        for name, series in cols.items():
            if name in ("x", "empirical"):
                continue
            ax.plot(x, series, lw=1.0, label=name)
        ax.set_title(cond.upper())
        ax.set_xlabel("envelope")
        ax.set_ylabel("CDF")
        ax.set_xscale("log")
        ax.legend(fontsize=7)
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
