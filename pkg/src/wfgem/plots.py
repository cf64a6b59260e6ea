"""Figure rendering for the CLI report paths.

Every plotting function takes data already computed elsewhere and writes a
PNG next to the delimited output, returning the file path.  The Agg backend
is forced so rendering works headless; figures are always closed so batch
runs do not accumulate state.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_kernel_heatmap",
    "plot_path",
    "plot_histogram",
    "plot_coupling",
    "plot_gem_sample",
    "plot_margins",
]


def _finish(fig, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)) or ".", exist_ok=True)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_kernel_heatmap(path: str, t: float, xg: np.ndarray, yg: np.ndarray, values: np.ndarray) -> str:
    """Transition density heatmap on the evaluation grid."""
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    im = ax.pcolormesh(yg, xg, values, shading="auto", cmap="viridis")
    fig.colorbar(im, ax=ax, label=f"p_t(x, y), t = {t:g}")
    ax.set_xlabel("y")
    ax.set_ylabel("x")
    ax.set_title("heat kernel")
    return _finish(fig, path)


def plot_path(path: str, times: np.ndarray, states: np.ndarray, labels=None) -> str:
    """Trajectory plot; `states` may be (n,) or (n, d) for d coordinates."""
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    arr = np.atleast_2d(states.T).T if states.ndim == 1 else states
    for j in range(arr.shape[1] if arr.ndim > 1 else 1):
        col = arr[:, j] if arr.ndim > 1 else arr
        lbl = labels[j] if labels else None
        ax.plot(times, col, lw=0.8, label=lbl)
    ax.set_xlabel("t")
    ax.set_ylabel("state")
    ax.set_ylim(-0.02, 1.02)
    if labels:
        ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def plot_histogram(path: str, histogram: np.ndarray, a: float, b: float) -> str:
    """Occupation histogram against the Beta(2a,2b) stationary density."""
    from scipy.stats import beta as beta_dist

    nb = histogram.size
    edges = np.linspace(0.0, 1.0, nb + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    total = histogram.sum()
    dens = histogram / total * nb if total else histogram
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.step(centers, dens, where="mid", lw=0.7, label="occupation")
    xx = np.linspace(1e-4, 1 - 1e-4, 512)
    ax.plot(xx, beta_dist(2 * a, 2 * b).pdf(xx), "k--", lw=1.2, label="Beta(2a, 2b)")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_ylim(bottom=0)
    ax.legend()
    return _finish(fig, path)


def plot_coupling(path: str, cp) -> str:
    """Coupled trajectories with the intrinsic distance and its envelope."""
    from .constants import rho

    fig, axes = plt.subplots(2, 1, figsize=(6.4, 5.4), sharex=True)
    axes[0].plot(cp.times, cp.x, lw=0.8, label="x")
    axes[0].plot(cp.times, cp.y, lw=0.8, label="y")
    axes[0].set_ylabel("state")
    axes[0].legend(loc="best", fontsize=8)
    rr = rho(cp.x, cp.y)
    axes[1].plot(cp.times, rr, lw=0.9, label="rho(x, y)")
    axes[1].plot(cp.times, cp.envelope, "k--", lw=1.1, label="envelope")
    if math.isfinite(cp.tau):
        axes[1].axvline(cp.tau, color="grey", lw=0.8, ls=":", label="coupling time")
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("distance")
    axes[1].legend(loc="best", fontsize=8)
    return _finish(fig, path)


def plot_gem_sample(path: str, masses: np.ndarray, remainder: float) -> str:
    """Stick masses in sampling order plus the unallocated remainder."""
    n = masses.size
    fig, ax = plt.subplots(figsize=(6.0, 3.4))
    ax.bar(np.arange(1, n + 1), masses, width=0.8, label="masses")
    ax.bar([n + 1], [remainder], width=0.8, color="tab:red", label="remainder")
    ax.set_xlabel("stick index")
    ax.set_ylabel("mass")
    ax.legend()
    return _finish(fig, path)


def plot_margins(path: str, reports) -> str:
    """Signed worst-case margins per check, log-magnitude, colored by status."""
    colors = {"PASS": "tab:green", "FAIL": "tab:red", "INCONCLUSIVE": "tab:orange"}
    names = [f"{r.name}[{r.params.get('label', '')}]" for r in reports]
    margins = [r.margin for r in reports]
    # symmetric log transform keeps sign while spanning many decades
    vals = [math.copysign(math.log10(1.0 + abs(m) / 1e-12), m) for m in margins]
    cols = [colors.get(r.status, "grey") for r in reports]
    fig, ax = plt.subplots(figsize=(7.2, 0.25 * len(names) + 1.2))
    ax.barh(range(len(names)), vals, color=cols)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=6)
    ax.invert_yaxis()
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("sign(margin) * log10(1 + |margin| / 1e-12)")
    ax.set_title("worst-case margins (positive = pass)")
    return _finish(fig, path)
