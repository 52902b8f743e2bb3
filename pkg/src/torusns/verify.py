"""Empirical verification of the embedding inequalities the diagnostics
rest on: the fractional Sobolev embedding on the n-torus, the per-slab
L^q bound with its sqrt(N) factor, and the low-band interpolation bound.

Each verifier samples random fields with power-law shell spectra (decay
exponents drawn uniformly from [1, 3]), strips the claimed constant and
the sqrt(N) scaling from the inequality, and records the maximum of
left/right over the samples.  Boundedness is asserted empirically: the
maxima must not trend upward across an 8x range of cut levels, and the
embedding maximum must be stable under resolution doubling.  Constants are
never estimated beyond these stability checks.

Sampling parallelizes across worker processes; per-sample seeds come from
one seed sequence, and results merge by max-reduction, so reports are
independent of the worker count.  The sampling loops evaluate their L^q
quadratures in single precision (the resulting 1e-7 relative error is
immaterial against the 10-20 percent stability thresholds); the ratio
helpers default to full precision for reference checks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as _fft

from . import fields
from .decomposition import low_cut, partition_piece
from .fields import GridSpec, SpectralField, wavenumbers
from .norms import lq_norm, sobolev_norm
from .operators import random_divfree_field

EMBEDDING = "sobolev-embedding"
SLAB_BOUND = "slab-lq-bound"
INTERPOLATION_BOUND = "low-band-interpolation"

_EXPONENT_RANGE = (1.0, 3.0)
_TINY = 1e-300


@dataclass(frozen=True)
class InequalityReport:
    """Empirical max of left/right for one inequality, plus stability data."""

    inequality: str
    samples_requested: int
    samples_used: int
    max_ratio: float
    parameters: tuple
    per_level: tuple = ()        # ((cut, max_ratio, used), ...)
    per_resolution: tuple = ()   # ((modes, max_ratio, used), ...)
    growth: float | None = None
    doubling_ratio: float | None = None
    stable: bool = True


def default_workers() -> int:
    env = os.environ.get("TORUSNS_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# scalar fields on the n-torus (the embedding is a scalar statement)

@lru_cache(maxsize=None)
def _scalar_ksq(dimension: int, m: int) -> np.ndarray:
    k2 = wavenumbers(m) ** 2
    ksq = k2
    for _ in range(dimension - 1):
        ksq = ksq[..., None] + k2
    ksq = np.ascontiguousarray(ksq)
    ksq.setflags(write=False)
    return ksq


def _hermitian_part_nd(c: np.ndarray) -> np.ndarray:
    axes = tuple(range(c.ndim))
    rev = c[(slice(None, None, -1),) * c.ndim]
    rev = np.roll(rev, shift=(1,) * c.ndim, axis=axes)
    return 0.5 * (c + np.conj(rev))


def random_scalar_coeffs(dimension: int, m: int, exponent: float, seed: int) -> np.ndarray:
    """Random real scalar field on the dimension-torus, as coefficients.

    Same recipe as the vector generator: Gaussian phases, then each shell
    rescaled so sum_{|k|=kappa} |c^k|^2 kappa^2 = kappa^(-exponent).
    """
    rng = np.random.default_rng(seed)
    shape = (m,) * dimension
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    nyq = wavenumbers(m) != -(m // 2)
    keep = nyq
    for _ in range(dimension - 1):
        keep = keep[..., None] & nyq
    c *= keep
    c = _hermitian_part_nd(c)
    c[(0,) * dimension] = 0.0

    ksq = _scalar_ksq(dimension, m)
    realized = np.bincount(ksq.ravel(), weights=(np.abs(c) ** 2 * ksq).ravel())
    n_values = np.arange(realized.size, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        target = n_values ** (-exponent / 2.0)
        scale = np.where(realized > 0, np.sqrt(target / np.where(realized > 0, realized, 1.0)), 0.0)
    scale[0] = 0.0
    c *= scale[ksq]
    return c


def scalar_lq_norm(coeffs: np.ndarray, q: float) -> float:
    """L^q norm of a scalar coefficient cube via oversampled quadrature."""
    m = coeffs.shape[0]
    mag = np.abs(coeffs)
    band = 0
    for axis in range(coeffs.ndim):
        other = tuple(a for a in range(coeffs.ndim) if a != axis)
        present = mag.sum(axis=other) > 0.0
        if present.any():
            band = max(band, int(np.abs(wavenumbers(m))[present].max()))
    if band == 0:
        return 0.0
    if q != math.inf and float(q).is_integer() and int(q) % 2 == 0:
        size = _fft.next_fast_len(max(int(q) * band + 2, m), real=False)
    else:
        size = 2 * m
    idx = wavenumbers(m) % size
    padded = np.zeros((size,) * coeffs.ndim, dtype=np.complex128)
    padded[np.ix_(*([idx] * coeffs.ndim))] = coeffs
    phys = _fft.ifftn(padded, norm="forward", workers=fields.fft_workers()).real
    if q == math.inf:
        return float(np.max(np.abs(phys)))
    return float(np.mean(np.abs(phys) ** q) ** (1.0 / q))


def scalar_fractional_norm(coeffs: np.ndarray, s: float) -> float:
    """|(-Laplacian)^s h|_{L^2} via the multiplier (4 pi^2 |k|^2)^s."""
    m = coeffs.shape[0]
    lam = (4.0 * np.pi**2) * _scalar_ksq(coeffs.ndim, m).astype(np.float64)
    with np.errstate(divide="ignore"):
        mult = lam ** (2.0 * s)
    mult[(0,) * coeffs.ndim] = 0.0 if s > 0 else 1.0
    return float(np.sqrt(np.sum(np.abs(coeffs) ** 2 * mult)))


def embedding_order(dimension: int, q: float) -> float:
    """The fractional order s with 2s/n = 1/2 - 1/q."""
    return dimension * (0.5 - 1.0 / q) / 2.0


def embedding_ratio(coeffs: np.ndarray, dimension: int, q: float) -> float | None:
    """|h|_{L^q} / (|(-Lap)^s h| + |h|) with the matching order s."""
    s = embedding_order(dimension, q)
    l2 = float(np.sqrt(np.sum(np.abs(coeffs) ** 2)))
    denom = scalar_fractional_norm(coeffs, s) + l2
    if denom < _TINY:
        return None
    return scalar_lq_norm(coeffs, q) / denom


# ---------------------------------------------------------------------------
# band-bound ratios on 3D vector fields

def slab_ratio(component_field: SpectralField, n: int, q: float,
               single_precision: bool = False) -> float | None:
    """|v^i|_{L^q} / (sqrt(N) |A^s v^i|) with s = 1/2 - 1/q."""
    s = 0.5 - 1.0 / q
    denom = math.sqrt(n) * sobolev_norm(component_field, s)
    if denom < _TINY:
        return None
    return lq_norm(component_field, q, single_precision) / denom


def interpolation_ratio(low_band: SpectralField, n: int, q: float,
                        lq_value: float | None = None,
                        single_precision: bool = False) -> float | None:
    """|v_N|_{L^q} / (sqrt(N) |v_N|^{2/q} |A^{1/2} v_N|^{1-2/q}).

    lq_value, when supplied, is used as the numerator (callers batching
    several norm evaluations pass it in).
    """
    l2 = low_band.l2_norm()
    h1 = sobolev_norm(low_band, 0.5)
    denom = math.sqrt(n) * l2 ** (2.0 / q) * h1 ** (1.0 - 2.0 / q)
    if denom < _TINY:
        return None
    if lq_value is None:
        lq_value = lq_norm(low_band, q, single_precision)
    return lq_value / denom


# ---------------------------------------------------------------------------
# sampling workers (module level so process pools can pickle them)

def _init_worker():
    fields.set_fft_workers(1)


def _embedding_chunk(args) -> tuple[float, int]:
    dimension, q, m, seeds = args
    best = 0.0
    used = 0
    for s in seeds:
        rng = np.random.default_rng(int(s))
        a = rng.uniform(*_EXPONENT_RANGE)
        coeffs = random_scalar_coeffs(dimension, m, a, int(rng.integers(2**63)))
        ratio = embedding_ratio(coeffs, dimension, q)
        if ratio is not None:
            best = max(best, ratio)
            used += 1
    return best, used


def _carrier_grid(modes: int, band_limit: int | None) -> GridSpec:
    """Smallest even grid holding the sampled band.

    Norms, masks, and partition labels depend only on the coefficient set,
    so band-limited fields are carried on the smallest grid that contains
    the band; values are identical to carrying them at full resolution.
    """
    if band_limit is None:
        return GridSpec(modes_per_dim=modes, viscosity=1.0)
    m = min(modes, _fft.next_fast_len(2 * int(band_limit) + 2, real=False))
    if m % 2:
        m += 1
    return GridSpec(modes_per_dim=max(m, 4), viscosity=1.0)


def _band_chunk(args) -> list[tuple[dict, dict]]:
    kinds, component, q, n_list, m, band_limit, seeds = args
    grid = _carrier_grid(m, band_limit)
    best = {kind: {n: 0.0 for n in n_list} for kind in kinds}
    used = {kind: {n: 0 for n in n_list} for kind in kinds}
    for s in seeds:
        rng = np.random.default_rng(int(s))
        a = rng.uniform(*_EXPONENT_RANGE)
        u = random_divfree_field(grid, a, int(rng.integers(2**63)), max_wavenumber=band_limit)
        for n in n_list:
            if SLAB_BOUND in kinds:
                ratio = slab_ratio(partition_piece(u, n, component), n, q,
                                   single_precision=True)
                if ratio is not None:
                    best[SLAB_BOUND][n] = max(best[SLAB_BOUND][n], ratio)
                    used[SLAB_BOUND][n] += 1
            if INTERPOLATION_BOUND in kinds:
                ratio = interpolation_ratio(low_cut(u, n), n, q,
                                            single_precision=True)
                if ratio is not None:
                    best[INTERPOLATION_BOUND][n] = max(best[INTERPOLATION_BOUND][n], ratio)
                    used[INTERPOLATION_BOUND][n] += 1
    return [(best[kind], used[kind]) for kind in kinds]


def _run_chunks(worker, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [worker(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as pool:
        return list(pool.map(worker, jobs))


def _seed_chunks(seed: int, samples: int, workers: int) -> list[np.ndarray]:
    per_chunk = max(1, min(50, math.ceil(samples / max(workers * 4, 1))))
    all_seeds = np.random.SeedSequence(seed).generate_state(samples, dtype=np.uint64)
    return [all_seeds[i : i + per_chunk] for i in range(0, samples, per_chunk)]


# ---------------------------------------------------------------------------
# public verifiers

def verify_fractional_embedding(
    dimension: int,
    q: float,
    samples: int,
    seed: int,
    modes: int = 64,
    check_doubling: bool = True,
    stability_factor: float = 1.1,
    workers: int | None = None,
) -> InequalityReport:
    """Sample the fractional Sobolev embedding ratio on the dimension-torus.

    The empirical maximum must be stable under resolution doubling: the
    ratio of the maxima at 2M and M stays within stability_factor of 1.
    """
    if dimension not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {dimension!r}")
    if not q > 2:
        raise ValueError(f"the embedding requires q > 2, got {q!r}")
    s = embedding_order(dimension, q)
    if not s < 1:
        raise ValueError(f"embedding order s={s!r} must be below 1")
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples!r}")
    workers = default_workers() if workers is None else max(1, workers)

    resolutions = [modes, 2 * modes] if check_doubling else [modes]
    per_resolution = []
    for m in resolutions:
        chunks = _seed_chunks(seed, samples, workers)
        jobs = [(dimension, q, m, c) for c in chunks]
        results = _run_chunks(_embedding_chunk, jobs, workers)
        best = max(r[0] for r in results)
        used = sum(r[1] for r in results)
        per_resolution.append((m, best, used))

    doubling = None
    stable = True
    if check_doubling:
        doubling = per_resolution[1][1] / max(per_resolution[0][1], _TINY)
        stable = 1.0 / stability_factor <= doubling <= stability_factor
    return InequalityReport(
        inequality=EMBEDDING,
        samples_requested=samples,
        samples_used=per_resolution[0][2],
        max_ratio=per_resolution[0][1],
        parameters=(("dimension", dimension), ("q", q), ("s", s), ("modes", modes)),
        per_resolution=tuple(per_resolution),
        doubling_ratio=doubling,
        stable=stable,
    )


def _validate_band_args(which: str, q: float, n_list, samples: int, component: int) -> list[int]:
    if which not in (SLAB_BOUND, INTERPOLATION_BOUND):
        raise ValueError(f"unknown inequality {which!r}")
    levels = [int(n) for n in n_list]
    if not levels or any(n < 1 for n in levels) or sorted(levels) != levels:
        raise ValueError(f"n_list must be increasing positive integers, got {n_list!r}")
    if which == SLAB_BOUND:
        if q == math.inf or not 2 <= q:
            raise ValueError(f"slab bound requires finite q >= 2, got {q!r}")
        s = 0.5 - 1.0 / q
        if not 0 <= 2 * s < 1:
            raise ValueError(f"slab bound order s={s!r} outside [0, 1/2)")
        if component not in (1, 2, 3):
            raise ValueError(f"component must be 1, 2, or 3, got {component!r}")
    else:
        if q == math.inf or not q >= 2:
            raise ValueError(f"interpolation bound requires finite q >= 2, got {q!r}")
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples!r}")
    return levels


def _sample_band_maxima(kinds, q, levels, samples, seed, modes, component,
                        band_limit, workers):
    if band_limit == "dealias":
        grid = GridSpec(modes_per_dim=modes, viscosity=1.0)
        band_limit = int(grid.dealias_fraction * modes / 2)
    chunks = _seed_chunks(seed, samples, workers)
    jobs = [(tuple(kinds), component, q, tuple(levels), modes, band_limit, c)
            for c in chunks]
    results = _run_chunks(_band_chunk, jobs, workers)
    merged = {}
    for i, kind in enumerate(kinds):
        best = {n: max(r[i][0][n] for r in results) for n in levels}
        used = {n: sum(r[i][1][n] for r in results) for n in levels}
        merged[kind] = (best, used)
    return merged, band_limit


def _band_report(which, q, levels, samples, modes, component, band_limit,
                 growth_limit, best, used) -> InequalityReport:
    per_level = tuple((n, best[n], used[n]) for n in levels)
    first = max(best[levels[0]], _TINY)
    growth = max(best[n] for n in levels) / first
    params = [("q", q), ("modes", modes), ("band_limit", band_limit)]
    if which == SLAB_BOUND:
        params += [("component", component), ("s", 0.5 - 1.0 / q)]
    return InequalityReport(
        inequality=which,
        samples_requested=samples,
        samples_used=min(used.values()),
        max_ratio=max(best.values()),
        parameters=tuple(params),
        per_level=per_level,
        growth=growth,
        stable=growth <= growth_limit,
    )


def verify_low_band_bounds(
    which: str,
    q: float,
    n_list,
    samples: int,
    seed: int,
    modes: int = 64,
    component: int = 1,
    growth_limit: float = 1.2,
    band_limit: int | None = "dealias",
    workers: int | None = None,
) -> InequalityReport:
    """Sample one of the low-band inequalities across a grid of cut levels.

    which: "slab-lq-bound" checks one anisotropic slab against
    sqrt(N) |A^s .|  with s = 1/2 - 1/q (requires 0 <= 2s < 1);
    "low-band-interpolation" checks the whole low band against
    sqrt(N) |.|^{2/q} |A^{1/2} .|^{1-2/q} (requires q >= 2).

    With the constant and sqrt(N) stripped, the per-level maxima must not
    grow by more than growth_limit across the level list; that captures the
    claim that sqrt(N) is the whole level dependence.  By default sample
    fields are confined to the grid's dealiased band, the band solver
    states occupy.
    """
    levels = _validate_band_args(which, q, n_list, samples, component)
    workers = default_workers() if workers is None else max(1, workers)
    merged, band_limit = _sample_band_maxima(
        [which], q, levels, samples, seed, modes, component, band_limit, workers)
    best, used = merged[which]
    return _band_report(which, q, levels, samples, modes, component, band_limit,
                        growth_limit, best, used)


def verify_low_band_suite(
    q: float,
    n_list,
    samples: int,
    seed: int,
    modes: int = 64,
    component: int = 1,
    growth_limit: float = 1.2,
    band_limit: int | None = "dealias",
    workers: int | None = None,
) -> tuple[InequalityReport, InequalityReport]:
    """Both low-band inequalities evaluated over one shared sample stream.

    Equivalent to two verify_low_band_bounds calls with the same seed and
    paired sample fields; generating each field once roughly halves the
    sampling cost.  Returns (slab report, interpolation report).
    """
    kinds = (SLAB_BOUND, INTERPOLATION_BOUND)
    for kind in kinds:
        levels = _validate_band_args(kind, q, n_list, samples, component)
    workers = default_workers() if workers is None else max(1, workers)
    merged, band_limit = _sample_band_maxima(
        kinds, q, levels, samples, seed, modes, component, band_limit, workers)
    return tuple(
        _band_report(kind, q, levels, samples, modes, component, band_limit,
                     growth_limit, *merged[kind])
        for kind in kinds
    )
