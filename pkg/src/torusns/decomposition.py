"""Sharp Fourier-mode filters: the genuinely three-dimensional high band
(all three |k_i| above the cut) and the complementary anisotropic slabs.

Every filter is a 0/1 mask on the coefficient cube, so the filters are
exact projections: idempotent, mutually orthogonal where supports are
disjoint, and they commute with any diagonal multiplier.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fields import GridSpec, SpectralField, wavenumbers

LABEL_V1 = "V1"
LABEL_V2 = "V2"
LABEL_V3 = "V3"
LABEL_W = "W"

_LABEL_NAMES = (LABEL_V1, LABEL_V2, LABEL_V3, LABEL_W)


def _check_cut(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"cut level must be a positive integer, got {n!r}")
    return int(n)


@lru_cache(maxsize=None)
def genuine3d_mask(m: int, n: int) -> np.ndarray:
    """True exactly where |k_1|, |k_2| and |k_3| all exceed n."""
    high = np.abs(wavenumbers(m)) > n
    mask = high[:, None, None] & high[None, :, None] & high[None, None, :]
    mask.setflags(write=False)
    return mask


@lru_cache(maxsize=None)
def partition_masks(m: int, n: int) -> tuple[np.ndarray, ...]:
    """Disjoint masks (v1, v2, v3, w) covering the lattice.

    Precedence tests |k_1| first, then |k_2|, then |k_3|, so the three slab
    sums are disjoint by construction and w is the remainder.
    """
    low = np.abs(wavenumbers(m)) <= n
    shape = (m, m, m)
    l1 = np.broadcast_to(low[:, None, None], shape)
    l2 = np.broadcast_to(low[None, :, None], shape)
    l3 = np.broadcast_to(low[None, None, :], shape)
    v1 = l1.copy()
    v2 = (~l1) & l2
    v3 = (~l1) & (~l2) & l3
    w = (~l1) & (~l2) & (~l3)
    for a in (v1, v2, v3, w):
        a.setflags(write=False)
    return v1, v2, v3, w


@dataclass(frozen=True)
class ModePartition:
    """Classification of every wave vector into V1/V2/V3/W bins for one cut."""

    grid: GridSpec
    cut_level: int

    @classmethod
    def for_grid(cls, grid: GridSpec, cut_level: int) -> "ModePartition":
        return cls(grid, _check_cut(cut_level))

    def labels(self) -> np.ndarray:
        """Label codes 0..3 (V1, V2, V3, W) over the coefficient cube."""
        m = self.grid.modes_per_dim
        masks = partition_masks(m, self.cut_level)
        out = np.zeros((m, m, m), dtype=np.uint8)
        for code, mask in enumerate(masks):
            out[mask] = code
        return out

    def label_of(self, k) -> str:
        n = self.cut_level
        a1, a2, a3 = (abs(int(k[0])), abs(int(k[1])), abs(int(k[2])))
        if a1 <= n:
            return LABEL_V1
        if a2 <= n:
            return LABEL_V2
        if a3 <= n:
            return LABEL_V3
        return LABEL_W

    @staticmethod
    def label_name(code: int) -> str:
        return _LABEL_NAMES[code]


def genuine3d_cut(u: SpectralField, n: int) -> SpectralField:
    """Keep only the modes with all three |k_i| > n."""
    n = _check_cut(n)
    mask = genuine3d_mask(u.grid.modes_per_dim, n)
    return SpectralField(u.grid, u.coeffs * mask,
                         divergence_free=u.divergence_free, hermitian=u.hermitian)


def low_cut(u: SpectralField, n: int) -> SpectralField:
    """Complement of the genuine-3D cut: u minus its high band."""
    n = _check_cut(n)
    mask = genuine3d_mask(u.grid.modes_per_dim, n)
    return SpectralField(u.grid, u.coeffs * ~mask,
                         divergence_free=u.divergence_free, hermitian=u.hermitian)


def anisotropic_partition(
    u: SpectralField, n: int
) -> tuple[SpectralField, SpectralField, SpectralField]:
    """Split the low band into the three slab fields (|k_1| <= n first,
    then |k_2| <= n among the rest, then |k_3| <= n)."""
    n = _check_cut(n)
    return (partition_piece(u, n, 1), partition_piece(u, n, 2), partition_piece(u, n, 3))


def partition_piece(u: SpectralField, n: int, index: int) -> SpectralField:
    """One slab of the partition (index 1, 2, or 3) without building the rest."""
    n = _check_cut(n)
    if index not in (1, 2, 3):
        raise ValueError(f"slab index must be 1, 2, or 3, got {index!r}")
    mask = partition_masks(u.grid.modes_per_dim, n)[index - 1]
    return SpectralField(u.grid, u.coeffs * mask,
                         divergence_free=u.divergence_free, hermitian=u.hermitian)
