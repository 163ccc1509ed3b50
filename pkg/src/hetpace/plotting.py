"""Report figures written next to the CSV tables."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import PALETTE9, palette  # noqa: E402


def _colors(n):
    return palette(n) / 255.0


def plot_timeseries(path, traj, units, title=""):
    units = list(units)
    n = traj.frames.shape[2]
    cols = _colors(n)
    fig, axes = plt.subplots(len(units), 1, figsize=(8, 1.8 * len(units) + 0.6),
                             sharex=True, squeeze=False)
    for ax, k in zip(axes[:, 0], units):
        for i in range(n):
            ax.plot(traj.times, traj.frames[:, k, i], color=cols[i], lw=0.8, label=f"{i + 1}")
        ax.set_ylabel(f"unit {k}")
    axes[-1, 0].set_xlabel("time")
    if n <= 9:
        axes[0, 0].legend(ncol=n, fontsize=7, loc="upper right")
    if title:
        axes[0, 0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_spacetime(path, traj, item=0):
    """First-item concentration along a chain or ring versus time."""
    fig, ax = plt.subplots(figsize=(8, 4))
    im = ax.imshow(traj.frames[:, :, item].T, aspect="auto", origin="lower",
                   extent=(traj.times[0], traj.times[-1], 0, traj.frames.shape[1]),
                   cmap="viridis")
    ax.set_xlabel("time")
    ax.set_ylabel("unit")
    fig.colorbar(im, ax=ax, label=f"item {item + 1}")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_grid_snapshot(path, items, conc, title=""):
    """Dominant-item map beside the dominant concentration."""
    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 4.2))
    a.imshow(PALETTE9[items] if items.max() >= 3 else palette(3)[items], origin="lower")
    a.set_title("dominant item")
    im = b.imshow(conc, origin="lower", cmap="magma")
    b.set_title("dominant concentration")
    fig.colorbar(im, ax=b)
    for ax in (a, b):
        ax.set_xticks([])
        ax.set_yticks([])
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_profile(path, prof, R=None):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(prof.centers, prof.amplitude, "o-")
    if R is not None:
        ax.axvline(R, color="gray", ls="--", lw=0.8)
    ax.set_xlabel("distance from centre")
    ax.set_ylabel("mean amplitude")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_scan(path, rows):
    rows = np.asarray(rows, dtype=float)
    gp, gd = np.unique(rows[:, 0]), np.unique(rows[:, 1])
    fig, axes = plt.subplots(1, 4, figsize=(13, 3.2), sharey=True)
    for j, ax in enumerate(axes):
        z = rows[:, 2 + j].reshape(len(gp), len(gd))
        im = ax.pcolormesh(gd, gp, z, shading="nearest", cmap="viridis")
        ax.set_title(f"delta_c{j + 1}")
        ax.set_xlabel("gamma_D")
        fig.colorbar(im, ax=ax)
    axes[0].set_ylabel("gamma_P")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_sweep(path, param, values, column, ys):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(values, ys, "o-")
    ax.set_xlabel(param)
    ax.set_ylabel(column)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
