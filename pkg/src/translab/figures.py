"""Static renderings of run diagnostics (headless backend)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .grid import EXTERIOR, Grid  # noqa: E402


def render_convergence(series, path: str):
    """Decay of the lagged-difference oscillation and of the speed spread,
    plus the running speed estimate."""
    t = [row.t for row in series]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.semilogy(t, [max(row.osc_w, 1e-300) for row in series],
                marker="o", ms=3, label="osc of lagged difference")
    ax.semilogy(t, [max(row.sup_ut_minus_speed, 1e-300) for row in series],
                marker="s", ms=3, label="sup |u_t - speed|")
    ax.set_xlabel("t")
    ax.set_ylabel("diagnostic (log scale)")
    ax.grid(True, which="both", alpha=0.3)
    ax2 = ax.twinx()
    ax2.plot(t, [row.speed_estimate for row in series], color="tab:green",
             lw=1.2, alpha=0.8, label="speed estimate")
    ax2.set_ylabel("speed estimate")
    lines, labels = ax.get_legend_handles_labels()
    l2, lab2 = ax2.get_legend_handles_labels()
    ax.legend(lines + l2, labels + lab2, loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_profile(grid: Grid, profile: np.ndarray, path: str):
    """The extracted translator profile: a curve in 1-D, a filled map in
    2-D with exterior nodes blanked."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    if grid.ndim == 1:
        ax.plot(grid.axes[0], profile, lw=1.5)
        ax.set_xlabel("x")
        ax.set_ylabel("profile (anchored to 0)")
        ax.grid(True, alpha=0.3)
    else:
        masked = np.ma.masked_where(grid.classification == EXTERIOR, profile)
        xs, ys = grid.axes
        im = ax.pcolormesh(xs, ys, masked.T, shading="nearest",
                           cmap="viridis")
        ax.set_aspect("equal")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        fig.colorbar(im, ax=ax, label="profile (anchored to 0)")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
