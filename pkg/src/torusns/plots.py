"""Figure rendering for run and verification reports.

Every plotting helper writes a PNG next to the delimited output and closes
its figure; nothing here touches an interactive backend.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .monitor import CriterionReport, SpectrumReport
from .spectra import ShellSpectrum
from .verify import InequalityReport

_DPI = 150


def _save(fig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)


def plot_energy(times, kinetic, y, path) -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    ax1.plot(times, kinetic, "-", color="tab:blue")
    ax1.set_ylabel("kinetic energy")
    ax2.plot(times, y, "-", color="tab:red")
    ax2.set_ylabel(r"$\|A^{1/2}u\|_{L^2}^2$")
    ax2.set_xlabel("time")
    for ax in (ax1, ax2):
        ax.grid(alpha=0.3)
    _save(fig, path)


def plot_spectrum(spec: ShellSpectrum, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    positive = spec.energy > 0
    if positive.any():
        k = spec.kappa[positive]
        e = spec.energy[positive]
        ax.loglog(k, e, ".", ms=4, color="tab:blue", label="E(kappa)")
        kref = np.array([k.min(), k.max()])
        anchor = e.max()
        ax.loglog(kref, anchor * (kref / kref[0]) ** (-5.0 / 3.0), "--",
                  color="gray", lw=1, label=r"$\kappa^{-5/3}$")
        ax.loglog(kref, anchor * (kref / kref[0]) ** (-2.0), ":",
                  color="gray", lw=1, label=r"$\kappa^{-2}$")
        ax.legend(fontsize=8)
    ax.set_xlabel(r"$\kappa$")
    ax.set_ylabel(r"$E(\kappa)$")
    if title:
        ax.set_title(title, fontsize=10)
    ax.grid(alpha=0.3, which="both")
    _save(fig, path)


def plot_serrin(report: CriterionReport, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for row in report.rows:
        label = f"N={row.cut_level}"
        ax.plot(report.times, row.running, "-", label=label)
    form = "gradient form" if report.rows and report.rows[0].gradient_form else "velocity form"
    q = report.rows[0].q if report.rows else float("nan")
    r = report.rows[0].r if report.rows else float("nan")
    rtxt = "inf" if r == math.inf else f"{r:g}"
    ax.set_xlabel("time")
    ax.set_ylabel(f"running L^({q:g},{rtxt}) norm of high band ({form})")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_spectrum_weight(report: SpectrumReport, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    has_positive = False
    for j, d in enumerate(report.delta_list):
        ax.plot(report.times, report.weights[j], "-", label=f"delta={d:g}")
        ax.plot(report.times, report.trailing_min[j], "--", lw=1, alpha=0.6)
        has_positive = has_positive or any(w > 0 for w in report.weights[j])
    if has_positive:
        ax.set_yscale("log")
    ax.set_xlabel("time")
    ax.set_ylabel(r"$\sup_\kappa\, \kappa^\delta E(\kappa)$ of high band")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_inequalities(reports, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    plotted = False
    for report in reports:
        if report.per_level:
            levels = [lvl for lvl, _, _ in report.per_level]
            maxima = [r for _, r, _ in report.per_level]
            ax.plot(levels, maxima, "o-", label=report.inequality)
            plotted = True
        elif report.per_resolution:
            modes = [m for m, _, _ in report.per_resolution]
            maxima = [r for _, r, _ in report.per_resolution]
            ax.plot(modes, maxima, "s--", label=f"{report.inequality} (vs modes)")
            plotted = True
    ax.set_xscale("log", base=2)
    ax.set_xlabel("cut level N (or modes)")
    ax.set_ylabel("empirical max of left/right")
    if plotted:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, path)
