"""Figure rendering for the report paths; CSV stays the data contract."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_trajectory_figure(traj, path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(traj.times, np.sqrt(traj.l2_sq), label=r"$\|u\|_{L^2}$")
    ax.plot(traj.times, np.sqrt(traj.h1_sq), label=r"$\|u\|_{H^1}$")
    ax.plot(traj.times, np.sqrt(traj.h3_sq), label=r"$\|u\|_{H^3}$")
    for t in traj.event_times:
        ax.axvline(t, color="0.8", lw=0.6, zorder=0)
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.set_title(f"trajectory norms (status: {traj.status})")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_energy_figure(records, path) -> None:
    t = [r.t for r in records]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 5.2), sharex=True)
    ax1.plot(t, [r.fbar for r in records], color="tab:blue")
    ax1.set_ylabel(r"$\bar F(u)$")
    ax2.plot(t, [r.heff_h1_sq for r in records], color="tab:red")
    ax2.set_ylabel(r"$\|H_{\mathrm{eff}}\|_{H^1}^2$")
    ax2.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_condition1_figure(report, path) -> None:
    cases = [row["case"] for row in report.rows]
    dists = [row["distance"] for row in report.rows]
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    ax.semilogy(cases, dists, "o-")
    ax.set_xlabel("sequence index")
    ax.set_ylabel("trajectory distance")
    ax.set_title("control sequence convergence")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_condition2_figure(report, path) -> None:
    eps = [row["epsilon"] for row in report.rows]
    mean = [row["metric_mean"] for row in report.rows]
    se = [row["metric_se"] for row in report.rows]
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    ax.errorbar(eps, mean, yerr=se, fmt="o-", capsize=3)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"noise scale $\varepsilon$")
    ax.set_ylabel(r"$E[\sup_t\|Y-y\|_{H^1}^2 + \int\|Y-y\|_{H^3}^2\,dt]$")
    ax.set_title("small-noise convergence to the skeleton")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_flow_check_figure(marks, errors, path) -> None:
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    ax.semilogy(np.abs(marks), errors, "o", ms=4)
    ax.set_xlabel("|mark|")
    ax.set_ylabel("max grid discrepancy (closed form vs RK4)")
    ax.set_title("flow map cross-validation")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
