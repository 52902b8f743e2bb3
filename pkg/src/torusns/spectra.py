"""Shell energy spectra E(kappa) = sum_{|k|=kappa} |c^k|^2 |k|^2 and
derived diagnostics (power-law fits, weighted suprema).

Both stored members of each Hermitian pair contribute to a shell, so a
single real mode pair with |c^k|^2 = |c^-k|^2 = 1 yields E = 2.  Exact
binning groups modes by the integer |k|^2 (kappa = sqrt of an integer);
unit binning, intended for plotting, merges shells into [n-1/2, n+1/2).
The identity sum_kappa E(kappa) = |A^{1/2} u|^2 / (4 pi^2) holds on exact
bins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import SpectralField, wavenumber_sq

BIN_EXACT = "exact"
BIN_UNIT = "unit"


@dataclass(frozen=True)
class ShellSpectrum:
    """Energy per wavenumber shell, sorted by shell center kappa."""

    kappa: np.ndarray
    energy: np.ndarray
    binning: str = BIN_EXACT

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=np.float64)
        e = np.asarray(self.energy, dtype=np.float64)
        if k.shape != e.shape or k.ndim != 1:
            raise ValueError("kappa and energy must be 1-D arrays of equal length")
        if np.any(k <= 0):
            raise ValueError("shell centers must be positive")
        if np.any(e < 0):
            raise ValueError("shell energies must be nonnegative")
        order = np.argsort(k)
        object.__setattr__(self, "kappa", k[order])
        object.__setattr__(self, "energy", e[order])

    def total(self) -> float:
        return float(self.energy.sum())


def energy_spectrum(u: SpectralField, binning: str = BIN_EXACT) -> ShellSpectrum:
    """Shell energies of a mean-free field; empty shells are dropped."""
    ksq = wavenumber_sq(u.grid.modes_per_dim)
    weights = (np.abs(u.coeffs) ** 2).sum(axis=0) * ksq
    sums = np.bincount(ksq.ravel(), weights=weights.ravel())
    n = np.arange(sums.size)
    if binning == BIN_EXACT:
        populated = sums > 0.0
        populated[0] = False
        return ShellSpectrum(np.sqrt(n[populated]), sums[populated], BIN_EXACT)
    if binning == BIN_UNIT:
        centers = np.rint(np.sqrt(n.astype(np.float64))).astype(np.int64)
        merged = np.bincount(centers, weights=sums)
        idx = np.arange(merged.size)
        populated = merged > 0.0
        populated[0] = False
        return ShellSpectrum(idx[populated].astype(np.float64), merged[populated], BIN_UNIT)
    raise ValueError(f"unknown binning {binning!r}")


def decay_exponent(spec: ShellSpectrum, shell_range: tuple[float, float]) -> float:
    """Least-squares slope of log E against log kappa over a shell range."""
    lo, hi = shell_range
    sel = (spec.kappa >= lo) & (spec.kappa <= hi) & (spec.energy > 0.0)
    if int(sel.sum()) < 3:
        raise ValueError(
            f"power-law fit needs at least 3 populated shells in [{lo}, {hi}], "
            f"found {int(sel.sum())}"
        )
    slope, _ = np.polyfit(np.log(spec.kappa[sel]), np.log(spec.energy[sel]), 1)
    return float(slope)


def sup_weighted_spectrum(spec: ShellSpectrum, delta: float) -> float:
    """max over shells of kappa^delta E(kappa); delta must exceed 2."""
    if not delta > 2.0:
        raise ValueError(f"weight exponent must exceed 2, got {delta!r}")
    if spec.kappa.size == 0:
        return 0.0
    return float(np.max(spec.kappa**delta * spec.energy))


def synthetic_power_spectrum(max_ksq: int, exponent: float) -> ShellSpectrum:
    """Spectrum E(kappa) = kappa^(-exponent) on every representable shell.

    Shells run over all integers n <= max_ksq expressible as a sum of three
    squares; handy for exercising fits and weighted suprema against closed
    forms.
    """
    n = np.arange(1, max_ksq + 1)
    representable = np.array([_sum_of_three_squares(int(v)) for v in n])
    kappa = np.sqrt(n[representable].astype(np.float64))
    return ShellSpectrum(kappa, kappa ** (-exponent), BIN_EXACT)


def _sum_of_three_squares(n: int) -> bool:
    # Legendre: n is a sum of three squares unless n = 4^a (8b + 7).
    while n % 4 == 0:
        n //= 4
    return n % 8 != 7
