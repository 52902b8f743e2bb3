"""Spectral operators: projection, fractional Stokes powers, gradients,
the advective nonlinearity, and the trilinear form.

All operators are pure functions of immutable fields.  Every output has its
mean mode zeroed.  Quadratic products are dealiased with the grid's
two-thirds-style rule (zero modes with any |k_i| above
dealias_fraction * M/2 before and after pointwise products); the trilinear
form truncates harder, to half the band, so that triple products integrate
exactly on the collocation grid.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.fft as _fft

from .fields import (
    GridSpec,
    PhysicalField,
    SpectralField,
    SpectralTensor,
    fft_workers,
    hermitian_part,
    wavenumber_sq,
    wavenumbers,
)

TWO_PI = 2.0 * np.pi


@lru_cache(maxsize=None)
def dealias_mask(m: int, fraction: float) -> np.ndarray:
    """Boolean keep-mask: True where all |k_i| <= fraction * m/2."""
    k = np.abs(wavenumbers(m))
    limit = fraction * m / 2.0
    keep1 = k <= limit
    mask = keep1[:, None, None] & keep1[None, :, None] & keep1[None, None, :]
    mask.setflags(write=False)
    return mask


@lru_cache(maxsize=None)
def half_band_mask(m: int) -> np.ndarray:
    """Keep-mask |k_i| <= m/4: triple products of kept modes alias nowhere."""
    k = np.abs(wavenumbers(m))
    keep1 = k <= m // 4
    mask = keep1[:, None, None] & keep1[None, :, None] & keep1[None, None, :]
    mask.setflags(write=False)
    return mask


@lru_cache(maxsize=None)
def _nyquist_free_mask(m: int) -> np.ndarray:
    k = wavenumbers(m)
    keep1 = k != -(m // 2)
    mask = keep1[:, None, None] & keep1[None, :, None] & keep1[None, None, :]
    mask.setflags(write=False)
    return mask


def _leray_raw(c: np.ndarray, m: int) -> np.ndarray:
    """Per-mode removal of the component of c^k along k."""
    k = wavenumbers(m).astype(np.float64)
    kx = k[:, None, None]
    ky = k[None, :, None]
    kz = k[None, None, :]
    ksq = wavenumber_sq(m).astype(np.float64)
    kdotc = kx * c[0] + ky * c[1] + kz * c[2]
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(ksq > 0, kdotc / np.where(ksq > 0, ksq, 1.0), 0.0)
    out = np.empty_like(c)
    out[0] = c[0] - kx * factor
    out[1] = c[1] - ky * factor
    out[2] = c[2] - kz * factor
    out[:, 0, 0, 0] = 0.0
    return out


def leray_project(s: SpectralField) -> SpectralField:
    """Orthogonal projection onto divergence-free, mean-free fields."""
    return SpectralField(s.grid, _leray_raw(s.coeffs, s.grid.modes_per_dim),
                         divergence_free=True, hermitian=s.hermitian)


def stokes_power(s: SpectralField, exponent: float) -> SpectralField:
    """Apply the fractional Stokes multiplier (4 pi^2 |k|^2)^exponent."""
    if not 0.0 <= exponent <= 1.0:
        raise ValueError(f"exponent must lie in [0, 1], got {exponent!r}")
    lam = (4.0 * np.pi**2) * wavenumber_sq(s.grid.modes_per_dim).astype(np.float64)
    with np.errstate(divide="ignore"):
        mult = lam**exponent
    mult[0, 0, 0] = 0.0 if exponent > 0 else 1.0
    c = s.coeffs * mult
    c[:, 0, 0, 0] = 0.0
    return SpectralField(s.grid, c, divergence_free=s.divergence_free,
                         hermitian=s.hermitian)


def gradient(s: SpectralField) -> SpectralTensor:
    """Spectral gradient tensor: entry (i, j) holds 2 pi i k_i c^k_j."""
    m = s.grid.modes_per_dim
    k = wavenumbers(m).astype(np.float64)
    out = np.empty((3, 3, m, m, m), dtype=np.complex128)
    factors = (k[:, None, None], k[None, :, None], k[None, None, :])
    for i in range(3):
        out[i] = (TWO_PI * 1j) * factors[i] * s.coeffs
    return SpectralTensor(s.grid, out, hermitian=s.hermitian)


def _to_physical(coeffs: np.ndarray) -> np.ndarray:
    shape = coeffs.shape
    flat = coeffs.reshape((-1,) + shape[-3:])
    u = _fft.ifftn(flat, axes=(1, 2, 3), norm="forward", workers=fft_workers())
    return u.real.reshape(shape)


def _nonlinear_raw(c: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, float]:
    """Dealiased, projected advection term from raw coefficients.

    Returns (coefficients of P(u . grad u), max pointwise speed of the
    dealiased velocity); the speed rides along for CFL reporting since the
    physical field is already in hand.
    """
    m = grid.modes_per_dim
    mask = dealias_mask(m, grid.dealias_fraction)
    cu = c * mask
    k = wavenumbers(m).astype(np.float64)
    factors = (k[:, None, None], k[None, :, None], k[None, None, :])

    stack = np.empty((12, m, m, m), dtype=np.complex128)
    stack[:3] = cu
    for i in range(3):
        stack[3 + 3 * i : 6 + 3 * i] = (TWO_PI * 1j) * factors[i] * cu
    phys = _fft.ifftn(stack, axes=(1, 2, 3), norm="forward", workers=fft_workers()).real

    u = phys[:3]
    adv = np.zeros((3, m, m, m))
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(3):
            adv += u[i] * phys[3 + 3 * i : 6 + 3 * i]
        max_speed = float(np.sqrt(np.max(u[0] ** 2 + u[1] ** 2 + u[2] ** 2)))

    ca = _fft.fftn(adv, axes=(1, 2, 3), norm="forward", workers=fft_workers())
    ca = hermitian_part(ca) * mask
    ca = _leray_raw(ca, m)
    return ca, max_speed


def nonlinear_term(u: SpectralField) -> SpectralField:
    """P(u . grad u): pseudo-spectral product with dealiasing, then projection."""
    ca, _ = _nonlinear_raw(u.coeffs, u.grid)
    return SpectralField(u.grid, ca, divergence_free=True, hermitian=True)


def trilinear_form(phi: SpectralField, psi: SpectralField, eta: SpectralField) -> float:
    """Quadrature of sum_{i,j} phi_i d_i psi_j eta_j over the torus.

    All three fields are truncated to |k_i| <= M/4 first; the resulting
    triple product is a trigonometric polynomial the M-point grid integrates
    exactly, so the skew-symmetry cancellation for divergence-free phi holds
    to round-off.
    """
    if not (phi.grid == psi.grid == eta.grid):
        raise ValueError("trilinear form requires all fields on the same grid")
    m = phi.grid.modes_per_dim
    mask = half_band_mask(m)
    k = wavenumbers(m).astype(np.float64)
    factors = (k[:, None, None], k[None, :, None], k[None, None, :])

    stack = np.empty((15, m, m, m), dtype=np.complex128)
    stack[:3] = phi.coeffs * mask
    cpsi = psi.coeffs * mask
    for i in range(3):
        stack[3 + 3 * i : 6 + 3 * i] = (TWO_PI * 1j) * factors[i] * cpsi
    stack[12:] = eta.coeffs * mask
    phys = _to_physical(stack)

    total = 0.0
    for i in range(3):
        total += float(np.mean(phys[i] * np.sum(phys[3 + 3 * i : 6 + 3 * i] * phys[12:], axis=0)))
    return total


def random_divfree_field(
    grid: GridSpec,
    spectrum_exponent: float,
    seed: int,
    max_wavenumber: int | None = None,
) -> SpectralField:
    """Random divergence-free field with shell energy kappa^(-spectrum_exponent).

    Gaussian draws fix the phases and mode directions; each nonempty shell
    {|k|^2 = n} is then rescaled so its energy sum_{|k|=kappa} |c^k|^2 |k|^2
    equals kappa^(-spectrum_exponent) exactly.  Deterministic per seed.
    max_wavenumber, when given, truncates the support to |k_i| <= that bound
    (useful for sampling fields confined to the dealiased solver band).
    """
    m = grid.modes_per_dim
    rng = np.random.default_rng(seed)
    if max_wavenumber is None:
        c = rng.standard_normal((3, m, m, m)) + 1j * rng.standard_normal((3, m, m, m))
        c *= _nyquist_free_mask(m)
    else:
        rows = np.flatnonzero(np.abs(wavenumbers(m)) <= int(max_wavenumber))
        side = rows.size
        block = (rng.standard_normal((3, side, side, side))
                 + 1j * rng.standard_normal((3, side, side, side)))
        c = np.zeros((3, m, m, m), dtype=np.complex128)
        c[np.ix_(np.arange(3), rows, rows, rows)] = block
    c = hermitian_part(c)
    c = _leray_raw(c, m)

    ksq = wavenumber_sq(m)
    weights = (np.abs(c) ** 2).sum(axis=0) * ksq
    realized = np.bincount(ksq.ravel(), weights=weights.ravel())
    n_values = np.arange(realized.size, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        target = n_values ** (-spectrum_exponent / 2.0)
        scale_per_shell = np.where(realized > 0, np.sqrt(target / np.where(realized > 0, realized, 1.0)), 0.0)
    scale_per_shell[0] = 0.0
    c *= scale_per_shell[ksq]
    c[:, 0, 0, 0] = 0.0
    return SpectralField(grid, c, divergence_free=True, hermitian=True)
