"""PNG figures written next to the CSV/JSON outputs of the command line."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dynamics import Trajectory  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_trajectory(traj: Trajectory, path, title: str = "", limits: dict[str, float] | None = None) -> Path:
    """Frequency deviation of every area, and converter/governor power if present."""
    has_power = bool(traj.link_dp)
    fig, axes = plt.subplots(2 if has_power else 1, 1, figsize=(7, 5.5 if has_power else 3.5), sharex=True,
                             squeeze=False)
    ax = axes[0, 0]
    for a in sorted(traj.df):
        ax.plot(traj.t, traj.df[a], label=a)
        if limits and a in limits:
            ax.axhline(-limits[a], ls=":", lw=0.8, color="grey")
    ax.set_ylabel("frequency deviation [Hz]")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    if has_power:
        ax2 = axes[1, 0]
        for k in sorted(traj.link_dp):
            ax2.plot(traj.t, traj.link_dp[k], label=k)
        ax2.set_ylabel("converter power change [pu]")
        ax2.legend(loc="lower right", fontsize=8)
        ax2.grid(alpha=0.3)
    axes[-1, 0].set_xlabel("time [s]")
    return _save(fig, path)


def plot_prices(prices: dict[str, list[float]], path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for bus in sorted(prices):
        ax.step(np.arange(1, len(prices[bus]) + 1), prices[bus], where="mid", label=bus)
    ax.set_xlabel("period")
    ax.set_ylabel("energy price [EUR/puh]")
    ax.legend(fontsize=7, ncol=2)
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_table(tables: dict[str, dict[str, dict[str, float]]], rows: tuple[str, ...], path, title: str = "") -> Path:
    """Grouped bars: one panel per row of the market table, one bar group per area."""
    labels = list(tables)
    cols = [c for c in next(iter(tables.values()))[rows[0]] if c != "total"]
    fig, axes = plt.subplots(1, len(rows), figsize=(2.6 * len(rows), 3.4), squeeze=False)
    width = 0.8 / max(1, len(labels))
    x = np.arange(len(cols))
    for ax, row in zip(axes[0], rows):
        for i, lab in enumerate(labels):
            ax.bar(x + i * width, [tables[lab][row][c] for c in cols], width, label=lab)
        ax.set_xticks(x + width * (len(labels) - 1) / 2, cols)
        ax.set_title(row.replace("_", " "), fontsize=9)
        ax.tick_params(labelsize=7)
    axes[0, 0].legend(fontsize=7)
    if title:
        fig.suptitle(title)
    return _save(fig, path)
