"""Velocity fields on the unit torus, in spectral and physical form.

A field u(x) = sum_k c^k exp(2*pi*i k.x) is stored as the complex cube
c[comp, k1, k2, k3] with integer wavenumbers in FFT ordering
(k = fftfreq(M) * M).  The mean mode c^0 is held at zero, and generated
fields keep the Nyquist planes (k_i = -M/2) at zero so every retained mode
has its conjugate partner inside the box.  Transforms own all scaling: the
physical samples are exactly the trigonometric sum above evaluated at
x_j = j/M, and grid-mean(|u|^2) = sum_k |c^k|^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as _fft

_FFT_WORKERS = -1


def set_fft_workers(n: int) -> None:
    """Set the thread count scipy.fft uses inside transforms (-1 = all)."""
    global _FFT_WORKERS
    _FFT_WORKERS = n


def fft_workers() -> int:
    return _FFT_WORKERS


@lru_cache(maxsize=None)
def wavenumbers(m: int) -> np.ndarray:
    """Signed integer wavenumbers along one axis, FFT ordering."""
    k = np.rint(np.fft.fftfreq(m) * m).astype(np.int64)
    k.setflags(write=False)
    return k


@lru_cache(maxsize=None)
def wavenumber_sq(m: int) -> np.ndarray:
    """|k|^2 on the full (m, m, m) lattice as an integer cube."""
    k2 = wavenumbers(m) ** 2
    ksq = k2[:, None, None] + k2[None, :, None] + k2[None, None, :]
    ksq.setflags(write=False)
    return ksq


@lru_cache(maxsize=None)
def grid_coordinates(m: int) -> np.ndarray:
    """Uniform sample points x_j = j/m on [0, 1)."""
    x = np.arange(m) / m
    x.setflags(write=False)
    return x


@dataclass(frozen=True)
class GridSpec:
    """Resolution and physics parameters for the unit-torus grid.

    modes_per_dim must be even and at least 4; retained wavenumbers are
    |k_i| <= modes_per_dim/2 - 1 (the Nyquist plane carries no pairable
    mode and is kept empty by all field generators).
    """

    modes_per_dim: int
    viscosity: float
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        m = self.modes_per_dim
        if not isinstance(m, int) or m < 4 or m % 2 != 0:
            raise ValueError(f"modes_per_dim must be an even integer >= 4, got {m!r}")
        if not self.viscosity > 0:
            raise ValueError(f"viscosity must be positive, got {self.viscosity!r}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError(
                f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction!r}"
            )

    @property
    def max_wavenumber(self) -> int:
        return self.modes_per_dim // 2 - 1

    @property
    def shape(self) -> tuple[int, int, int]:
        m = self.modes_per_dim
        return (m, m, m)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpectralField:
    """Three-component Fourier coefficients c[comp, k1, k2, k3].

    divergence_free and hermitian are structural guarantees set by the
    operators that enforce them; code may rely on them for fast paths but
    never needs them for correctness.
    """

    grid: GridSpec
    coeffs: np.ndarray
    divergence_free: bool = False
    hermitian: bool = False

    def __post_init__(self):
        expected = (3,) + self.grid.shape
        if self.coeffs.shape != expected:
            raise ValueError(f"coeffs shape {self.coeffs.shape} != {expected}")
        c = self.coeffs
        if c.dtype != np.complex128:
            c = c.astype(np.complex128)
        object.__setattr__(self, "coeffs", _freeze(c))

    def mode(self, k) -> np.ndarray:
        """Coefficient 3-vector at wave vector k (any integers in the box)."""
        m = self.grid.modes_per_dim
        i, j, l = (int(k[0]) % m, int(k[1]) % m, int(k[2]) % m)
        return self.coeffs[:, i, j, l].copy()

    def with_mode(self, k, value) -> "SpectralField":
        """New field with the coefficient at k replaced (no symmetrization)."""
        m = self.grid.modes_per_dim
        c = self.coeffs.copy()
        c[:, int(k[0]) % m, int(k[1]) % m, int(k[2]) % m] = np.asarray(
            value, dtype=np.complex128
        )
        return SpectralField(self.grid, c)

    def l2_norm(self) -> float:
        """L2 norm over the unit torus, sum_k |c^k|^2 under Parseval."""
        c = self.coeffs
        return float(np.sqrt(np.sum(c.real**2) + np.sum(c.imag**2)))

    def divergence_max(self) -> float:
        """max_k |k . c^k|, the spectral divergence residual."""
        k = wavenumbers(self.grid.modes_per_dim).astype(np.float64)
        div = (
            k[:, None, None] * self.coeffs[0]
            + k[None, :, None] * self.coeffs[1]
            + k[None, None, :] * self.coeffs[2]
        )
        return float(np.max(np.abs(div)))


@dataclass(frozen=True)
class SpectralTensor:
    """3x3 tensor of Fourier coefficients, t[i, j] = coefficients of d_i u_j."""

    grid: GridSpec
    coeffs: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        expected = (3, 3) + self.grid.shape
        if self.coeffs.shape != expected:
            raise ValueError(f"coeffs shape {self.coeffs.shape} != {expected}")
        c = self.coeffs
        if c.dtype != np.complex128:
            c = c.astype(np.complex128)
        object.__setattr__(self, "coeffs", _freeze(c))

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))


@dataclass(frozen=True)
class PhysicalField:
    """Three-component real samples u[comp, j1, j2, j3] at x_j = j/M."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        expected = (3,) + self.grid.shape
        if self.samples.shape != expected:
            raise ValueError(f"samples shape {self.samples.shape} != {expected}")
        s = self.samples
        if s.dtype != np.float64:
            s = s.astype(np.float64)
        object.__setattr__(self, "samples", _freeze(s))

    def max_speed(self) -> float:
        return float(np.sqrt(np.max(np.einsum("cxyz,cxyz->xyz", self.samples, self.samples))))


def spectral_zeros(grid: GridSpec) -> SpectralField:
    return SpectralField(grid, np.zeros((3,) + grid.shape, dtype=np.complex128),
                         divergence_free=True, hermitian=True)


def physical_zeros(grid: GridSpec) -> PhysicalField:
    return PhysicalField(grid, np.zeros((3,) + grid.shape))


def field_from_modes(grid: GridSpec, modes: dict, divergence_free: bool = False,
                     hermitian: bool = False) -> SpectralField:
    """Build a field from a {wave vector: coefficient 3-vector} mapping.

    Coefficients are taken literally; callers supply both members of each
    Hermitian pair when they want a real field (and may then pass
    hermitian=True).
    """
    m = grid.modes_per_dim
    c = np.zeros((3, m, m, m), dtype=np.complex128)
    for k, v in modes.items():
        c[:, int(k[0]) % m, int(k[1]) % m, int(k[2]) % m] = np.asarray(v, np.complex128)
    return SpectralField(grid, c, divergence_free=divergence_free, hermitian=hermitian)


def hermitian_part(coeffs: np.ndarray) -> np.ndarray:
    """Project onto Hermitian-symmetric arrays: c^k -> (c^k + conj(c^-k))/2.

    Acts on the trailing three axes; leading component axes pass through.
    """
    rev = coeffs[..., ::-1, ::-1, ::-1]
    rev = np.roll(rev, shift=(1, 1, 1), axis=(-3, -2, -1))
    return 0.5 * (coeffs + np.conj(rev))


def hermitian_defect(coeffs: np.ndarray) -> float:
    """max |c^k - conj(c^-k)| over the box."""
    rev = coeffs[..., ::-1, ::-1, ::-1]
    rev = np.roll(rev, shift=(1, 1, 1), axis=(-3, -2, -1))
    return float(np.max(np.abs(coeffs - np.conj(rev))))


def forward_transform(p: PhysicalField) -> SpectralField:
    """Fourier coefficients of a physical field.

    The mean mode is zeroed (fields live in the mean-free space) and the
    result is symmetrized so Hermitian symmetry holds exactly.
    """
    c = _fft.fftn(p.samples, axes=(1, 2, 3), norm="forward", workers=_FFT_WORKERS)
    c = hermitian_part(c)
    c[:, 0, 0, 0] = 0.0
    return SpectralField(p.grid, c, hermitian=True)


def inverse_transform(s: SpectralField) -> PhysicalField:
    """Physical samples of a spectral field; rejects non-Hermitian input."""
    scale = float(np.max(np.abs(s.coeffs), initial=0.0))
    if hermitian_defect(s.coeffs) > 1e-10 * (1.0 + scale):
        raise ValueError("spectral field is not Hermitian-symmetric; "
                         "it has no real physical-space counterpart")
    u = _fft.ifftn(s.coeffs, axes=(1, 2, 3), norm="forward", workers=_FFT_WORKERS)
    return PhysicalField(s.grid, u.real)


def inner_product(a: SpectralField, b: SpectralField) -> float:
    """L2 inner product of two real fields via their coefficients."""
    if a.grid != b.grid:
        raise ValueError("grid mismatch in inner product")
    return float(np.real(np.sum(a.coeffs * np.conj(b.coeffs))))


def add(a: SpectralField, b: SpectralField) -> SpectralField:
    if a.grid != b.grid:
        raise ValueError("grid mismatch in field addition")
    return SpectralField(a.grid, a.coeffs + b.coeffs,
                         divergence_free=a.divergence_free and b.divergence_free,
                         hermitian=a.hermitian and b.hermitian)
