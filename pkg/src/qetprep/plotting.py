"""Figures and tab-separated tables for the ``report`` command."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def write_tsv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in r])
    return path


def plot_approximation(P, target, interval, path, title="") -> Path:
    """Target and approximant on the working interval, with the pointwise error."""
    ys = np.linspace(interval[0], interval[1], 2001)
    approx = P(ys) / P.scale
    exact = np.asarray(target(ys), dtype=float)
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax0.plot(ys, exact, label="target")
    ax0.plot(ys, approx, "--", label=f"degree {P.degree}")
    ax0.set_ylabel("normalised value")
    ax0.legend()
    ax0.set_title(title)
    ax1.semilogy(ys, np.abs(approx - exact) + 1e-18)
    ax1.set_xlabel("y")
    ax1.set_ylabel("|error|")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_state(metrics: dict, xbar, path) -> Path:
    """Simulated amplitudes against the exact normalised target state."""
    psi = np.array([complex(*v) for v in metrics["state"]])
    sign = np.sign(np.vdot(metrics["target"], psi).real) or 1.0
    order = np.argsort(xbar)
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax0.plot(np.asarray(xbar)[order], np.asarray(metrics["target"])[order], label="exact")
    ax0.plot(np.asarray(xbar)[order], (sign * psi.real)[order], ".", ms=3, label="simulated")
    ax0.set_ylabel("amplitude")
    ax0.legend()
    ax0.set_title(f"trace distance {metrics['trace_distance']:.3e}")
    diff = np.abs(sign * psi.real / np.linalg.norm(psi) - np.asarray(metrics["target"]))
    ax1.semilogy(np.asarray(xbar)[order], diff[order] + 1e-18)
    ax1.set_xlabel("x")
    ax1.set_ylabel("|difference|")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_trajectory(trajectory: list, path) -> Path:
    """Good-state probability after each amplification round."""
    ks = [t["round"] for t in trajectory]
    probs = [t["good_probability"] for t in trajectory]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(ks, probs, "o-")
    ax.set_xlabel("round")
    ax.set_ylabel("good-state probability")
    ax.set_ylim(0, 1.05)
    ax.set_xticks(ks)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_filling(ns, filling_N, filling_inf, path) -> Path:
    """Discrete filling fraction against register size, with the continuum value."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(ns, filling_N, "o-", label="grid")
    ax.axhline(filling_inf, color="k", ls=":", label="continuum")
    ax.set_xlabel("n")
    ax.set_ylabel("filling fraction")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
