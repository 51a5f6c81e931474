"""Figures for trajectories and ensembles, rendered straight to files."""
from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (5.5, 3.4),
    "savefig.dpi": 120,
}


def _positive(y):
    # log axes cannot show exact zeros
    y = np.asarray(y, dtype=float)
    floor = np.nanmin(y[y > 0]) * 1e-3 if np.any(y > 0) else 1e-300
    return np.where(y > 0, y, floor)


def plot_trajectory(traj, path, title: str | None = None) -> str:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        t = traj.times
        ax.semilogy(t, _positive(traj.errors), lw=1.2, label=r"$\|X_t-\bar\sigma\|_\infty$")
        if traj.bounds is not None:
            mask = ~np.isnan(traj.bounds)
            ax.semilogy(t[mask], _positive(traj.bounds[mask]), "--", lw=1.0,
                        label=f"bound ({traj.bound_kind})")
        ax.axhline(traj.tol, color="0.6", lw=0.8, ls=":", label="tol")
        ax.set_xlabel("t")
        ax.set_ylabel("error")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return str(path)


def plot_ensemble(ens, path, checkpoints=(), profile=(), title: str | None = None) -> str:
    with plt.rc_context(STYLE):
        ncols = 2 if len(profile) else 1
        fig, axes = plt.subplots(1, ncols, figsize=(5.5 * ncols / 1.4, 3.4), squeeze=False)
        ax = axes[0, 0]
        t = np.arange(ens.horizon + 1)
        ax.semilogy(t, _positive(ens.mean_err), lw=1.2, label="mean error")
        ax.semilogy(t, _positive(ens.max_err), lw=0.8, alpha=0.8, label="max error")
        ax.set_xlabel("t")
        ax.set_ylabel("error")
        ax.legend(frameon=False)
        if len(profile):
            ax2 = axes[0, 1]
            ax2.plot(list(checkpoints)[1:], profile, "o-", ms=3, lw=1.0)
            ax2.set_xlabel("checkpoint")
            ax2.set_ylabel(r"$W_1$ vs previous checkpoint")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return str(path)
