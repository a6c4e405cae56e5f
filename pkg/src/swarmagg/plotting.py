"""Figures rendered next to a run's CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import read_csv_columns, read_trajectory_csv  # noqa: E402


def _style(ax, xlabel, ylabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)


def plot_trajectories(positions, center, path, title=None):
    """Agent paths (thin) and the center path (thick) in the first two coordinates."""
    fig, ax = plt.subplots(figsize=(6, 6))
    for i in range(positions.shape[1]):
        ax.plot(positions[:, i, 0], positions[:, i, 1], lw=0.7, alpha=0.8)
        ax.plot(positions[0, i, 0], positions[0, i, 1], "o", ms=3, color="0.4")
    ax.plot(center[:, 0], center[:, 1], "k-", lw=1.8, label="swarm center")
    ax.plot(center[-1, 0], center[-1, 1], "k*", ms=10)
    ax.set_aspect("equal", adjustable="datalim")
    _style(ax, "x0", "x1")
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_center(center, path, title=None):
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(center[:, 0], center[:, 1], "k-", lw=1.2)
    ax.plot(center[0, 0], center[0, 1], "go", label="start")
    ax.plot(center[-1, 0], center[-1, 1], "r*", ms=10, label="end")
    ax.set_aspect("equal", adjustable="datalim")
    _style(ax, "x0", "x1")
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_dispersion(t, dispersion, rho_sq, path, title=None):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.semilogy(t, dispersion, label=r"$\sum_i \|x_i - \bar{x}\|^2$")
    ax.axhline(rho_sq, color="r", ls="--", label=r"$\rho^2$")
    _style(ax, "t [s]", "dispersion")
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_run(run_dir, title=None):
    """Render all figures for a run directory from its CSV files."""
    run_dir = Path(run_dir)
    traj = read_trajectory_csv(run_dir / "trajectory.csv")
    series = read_csv_columns(run_dir / "series.csv")
    if traj.dim < 2:
        positions = np.concatenate([traj.times[:, None, None].repeat(traj.n_agents, 1), traj.positions], axis=2)
        center = np.stack([traj.times, traj.center[:, 0]], axis=1)
    else:
        positions, center = traj.positions, traj.center
    paths = [run_dir / "trajectories.png", run_dir / "center.png", run_dir / "dispersion.png"]
    plot_trajectories(positions, center, paths[0], title)
    plot_center(center, paths[1], title)
    plot_dispersion(series["t"], series["dispersion"], float(series["rho_sq"][0]), paths[2], title)
    return paths
