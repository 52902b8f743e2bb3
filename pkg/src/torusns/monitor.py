"""Run observers for the regularity diagnostics: mixed space-time norms of
the genuinely 3D high band across a grid of cut levels, the enstrophy-level
series Y(t) = |A^{1/2} u|^2, and the weighted-spectrum supremum tracker.

Observers are plain callables fed every SolverState the run produces; each
exposes a report() with finalized values.  The limit over cut levels is
approximated by the minimum over the supplied list, and the limit toward
the end of a run by a trailing-window minimum, both documented proxies for
quantities the finite band cannot reach.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import genuine3d_cut
from .norms import SerrinAccumulator, lq_norm, scaling_class, serrin_accumulate, sobolev_norm
from .operators import gradient
from .spectra import ShellSpectrum, energy_spectrum, sup_weighted_spectrum


@dataclass(frozen=True)
class SerrinRow:
    """Finalized mixed norm for one cut level."""

    cut_level: int
    q: float
    r: float
    gradient_form: bool
    scaling: str | None
    final_norm: float
    values: tuple
    running: tuple


@dataclass(frozen=True)
class CriterionReport:
    """Per-cut Serrin norms, their minimum over the cut grid, and Y(t)."""

    rows: tuple
    liminf_proxy: float
    times: tuple
    y_series: tuple
    sobolev_series: dict
    complete: bool = True


class SerrinMonitor:
    """Accumulates |Q_N u|_{L^q} (or its gradient form) per cut level.

    gradient_form switches the integrand to the gradient tensor of the high
    band; the matching space-time scaling is then 3/q + 2/r = 2 instead
    of 1.  Values are recorded every `stride`-th observed state.
    """

    def __init__(self, n_list, q: float, r: float, gradient_form: bool = False,
                 stride: int = 1, sobolev_orders=()):
        if not n_list:
            raise ValueError("n_list must be nonempty")
        levels = [int(n) for n in n_list]
        if any(n < 1 for n in levels) or sorted(levels) != levels:
            raise ValueError(f"n_list must be increasing positive integers, got {n_list!r}")
        if stride < 1:
            raise ValueError(f"stride must be >= 1, got {stride!r}")
        self.n_list = levels
        self.q = float(q)
        self.r = float(r)
        self.gradient_form = bool(gradient_form)
        self.stride = int(stride)
        self.sobolev_orders = tuple(float(s) for s in sobolev_orders)
        self._acc = {n: SerrinAccumulator(q=self.q, r=self.r) for n in levels}
        self._values = {n: [] for n in levels}
        self._running = {n: [] for n in levels}
        self._times: list[float] = []
        self._y: list[float] = []
        self._sobolev = {s: [] for s in self.sobolev_orders}
        self._seen = 0

    def __call__(self, state) -> None:
        i = self._seen
        self._seen += 1
        if i % self.stride:
            return
        u = state.u
        self._times.append(state.t)
        self._y.append(sobolev_norm(u, 0.5) ** 2)
        for s in self.sobolev_orders:
            self._sobolev[s].append(sobolev_norm(u, s))
        for n in self.n_list:
            high = genuine3d_cut(u, n)
            target = gradient(high) if self.gradient_form else high
            value = lq_norm(target, self.q)
            self._acc[n] = serrin_accumulate(self._acc[n], state.t, value)
            self._values[n].append(value)
            self._running[n].append(self._acc[n].finalized())

    def report(self, complete: bool = True) -> CriterionReport:
        rows = tuple(
            SerrinRow(
                cut_level=n,
                q=self.q,
                r=self.r,
                gradient_form=self.gradient_form,
                scaling=scaling_class(self.q, self.r if not self.gradient_form else self.r),
                final_norm=self._acc[n].finalized(),
                values=tuple(self._values[n]),
                running=tuple(self._running[n]),
            )
            for n in self.n_list
        )
        finals = [row.final_norm for row in rows]
        return CriterionReport(
            rows=rows,
            liminf_proxy=min(finals) if finals else math.inf,
            times=tuple(self._times),
            y_series=tuple(self._y),
            sobolev_series={s: tuple(v) for s, v in self._sobolev.items()},
            complete=complete,
        )


@dataclass(frozen=True)
class SpectrumReport:
    """Weighted-spectrum suprema over time for one cut level."""

    cut_level: int
    delta_list: tuple
    times: tuple
    weights: tuple        # one series per delta
    trailing_min: tuple   # running min over the trailing window, per delta
    liminf_proxy: tuple   # final trailing-window minimum, per delta
    window: int


class SpectrumWeightMonitor:
    """Tracks sup_kappa kappa^delta E(kappa) of the high band per delta."""

    def __init__(self, n: int, delta_list, window: int = 8, stride: int = 1):
        deltas = [float(d) for d in delta_list]
        if any(not d > 2.0 for d in deltas):
            raise ValueError(f"all weight exponents must exceed 2, got {delta_list!r}")
        if window < 1 or stride < 1:
            raise ValueError("window and stride must be >= 1")
        self.n = int(n)
        self.delta_list = deltas
        self.window = int(window)
        self.stride = int(stride)
        self._times: list[float] = []
        self._weights = {d: [] for d in deltas}
        self._trailing = {d: [] for d in deltas}
        self._seen = 0

    def __call__(self, state) -> None:
        i = self._seen
        self._seen += 1
        if i % self.stride:
            return
        spec = energy_spectrum(genuine3d_cut(state.u, self.n))
        self._times.append(state.t)
        for d in self.delta_list:
            w = sup_weighted_spectrum(spec, d) if spec.kappa.size else 0.0
            series = self._weights[d]
            series.append(w)
            self._trailing[d].append(min(series[-self.window:]))

    def report(self) -> SpectrumReport:
        return SpectrumReport(
            cut_level=self.n,
            delta_list=tuple(self.delta_list),
            times=tuple(self._times),
            weights=tuple(tuple(self._weights[d]) for d in self.delta_list),
            trailing_min=tuple(tuple(self._trailing[d]) for d in self.delta_list),
            liminf_proxy=tuple(
                self._trailing[d][-1] if self._trailing[d] else 0.0 for d in self.delta_list
            ),
            window=self.window,
        )


class EnergyMonitor:
    """Records kinetic energy and Y(t) at every observed state."""

    def __init__(self):
        self.times: list[float] = []
        self.kinetic: list[float] = []
        self.y: list[float] = []

    def __call__(self, state) -> None:
        self.times.append(state.t)
        self.kinetic.append(0.5 * float(np.sum(np.abs(state.u.coeffs) ** 2)))
        self.y.append(sobolev_norm(state.u, 0.5) ** 2)


class SpectrumSnapshotMonitor:
    """Keeps the most recent shell spectrum of the full field."""

    def __init__(self, binning: str = "exact"):
        self.binning = binning
        self.latest: ShellSpectrum | None = None
        self.latest_time: float | None = None

    def __call__(self, state) -> None:
        self.latest = energy_spectrum(state.u, self.binning)
        self.latest_time = state.t
