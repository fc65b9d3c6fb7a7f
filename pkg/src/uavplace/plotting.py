"""Figures written next to the result files of a solve/oracle run."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata=_META)
    plt.close(fig)
    return path


def plot_convergence(history, path) -> Path:
    """Best aggregate throughput (Mbit/s) per iteration."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    it = np.arange(1, len(history) + 1)
    ax.step(it, np.asarray(history) / 1e6, where="post", color="C0")
    ax.set_xlabel("iteration")
    ax.set_ylabel("g_best fitness (Mbit/s)")
    ax.grid(alpha=0.3)
    return _save(fig, Path(path))


def plot_candidates(result, scenario, path, top: int = 5) -> Path:
    """Plan view of evaluated positions coloured by fitness, with footprints,
    users and the top-ranked positions."""
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    for b in scenario.buildings:
        xy = np.array(b.bottom_corners + (b.bottom_corners[0],))
        ax.fill(xy[:, 0], xy[:, 1], color="0.85", zorder=1)
        ax.plot(xy[:, 0], xy[:, 1], color="0.4", lw=1, zorder=2)
        c = xy[:-1].mean(axis=0)
        ax.text(c[0], c[1], f"B{b.id}\n{b.height:g} m", ha="center", va="center", fontsize=7)
    if result.visited:
        pts = np.array([v[0] for v in result.visited])
        fit = np.array([v[1] for v in result.visited]) / 1e6
        sc = ax.scatter(pts[:, 0], pts[:, 1], c=fit, s=8, cmap="viridis", zorder=3)
        fig.colorbar(sc, ax=ax, label="fitness (Mbit/s)")
    for u in scenario.users:
        ax.plot(u.position.x, u.position.y, "s", color="C3", ms=5, zorder=4)
        ax.annotate(f"UE{u.id}", (u.position.x, u.position.y), xytext=(3, 3),
                    textcoords="offset points", fontsize=7)
    best = result.optimal_positions[:top]
    if best:
        bp = np.array([o.position for o in best])
        ax.plot(bp[:, 0], bp[:, 1], "*", color="C1", ms=11, mec="k", zorder=5, label=f"top {len(best)}")
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal", adjustable="datalim")
    return _save(fig, Path(path))
