"""Time integration of the incompressible Navier-Stokes system in spectral
Galerkin form, plus the coupled evolution of the low band and the genuinely
3D high band as two sub-systems driven by the shared nonlinearity.

Integrator: integrating-factor RK4.  The viscous semigroup exp(-nu l_k dt)
is applied exactly per mode, so with the nonlinearity disabled the
propagator is exact; all time-discretization error sits in the explicit
RK4 treatment of the dealiased advection term and forcing.  The viscous
dissipation integral and the forcing work integral are advanced alongside
the state by the same RK4 stages, giving fourth-order energy bookkeeping.
"""

from __future__ import annotations

import logging
import math
import time as _time
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .fields import (
    GridSpec,
    SpectralField,
    field_from_modes,
    wavenumber_sq,
)
from .decomposition import genuine3d_mask
from .operators import _leray_raw, _nonlinear_raw

logger = logging.getLogger(__name__)

GROWTH_LIMIT = 1e6


class BlowupError(RuntimeError):
    """Numerical blowup: non-finite coefficients or runaway norm growth."""

    def __init__(self, time: float, step_count: int, reason: str):
        super().__init__(f"numerical blowup at t={time!r} (step {step_count}): {reason}")
        self.time = time
        self.step_count = step_count
        self.reason = reason


@dataclass(frozen=True)
class TimeConfig:
    """Fixed-step integration window; cfl_limit is advisory only."""

    dt: float
    t_end: float
    cfl_limit: float = 0.5
    nonlinear: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        if self.dt > self.t_end:
            raise ValueError(f"dt={self.dt!r} exceeds t_end={self.t_end!r}")
        if not self.cfl_limit > 0:
            raise ValueError(f"cfl_limit must be positive, got {self.cfl_limit!r}")


@dataclass(frozen=True)
class ForcingSpec:
    """Static divergence-free forcing given as Fourier mode pairs.

    Each entry (k, amplitude) contributes the mode and its conjugate
    partner, so the physical forcing is real; list one representative per
    pair.  Amplitudes must satisfy k . amplitude = 0 and k != 0.
    """

    modes: tuple = ()

    def __post_init__(self):
        norm_modes = []
        for k, amp in self.modes:
            kt = tuple(int(x) for x in k)
            at = tuple(complex(x) for x in amp)
            if kt == (0, 0, 0):
                raise ValueError("forcing must be mean-free: k = 0 not allowed")
            dot = sum(ki * ai for ki, ai in zip(kt, at))
            scale = max(abs(a) for a in at) if any(at) else 0.0
            if abs(dot) > 1e-12 * max(scale, 1.0):
                raise ValueError(f"forcing mode {kt} is not divergence-free: k.a = {dot!r}")
            norm_modes.append((kt, at))
        object.__setattr__(self, "modes", tuple(norm_modes))

    @classmethod
    def zero(cls) -> "ForcingSpec":
        return cls(())

    @property
    def is_zero(self) -> bool:
        return not self.modes


@lru_cache(maxsize=32)
def _forcing_coeffs(forcing: ForcingSpec, grid: GridSpec) -> np.ndarray | None:
    if forcing.is_zero:
        return None
    m = grid.modes_per_dim
    c = np.zeros((3, m, m, m), dtype=np.complex128)
    for k, amp in forcing.modes:
        a = np.asarray(amp, dtype=np.complex128)
        c[:, k[0] % m, k[1] % m, k[2] % m] += a
        c[:, -k[0] % m, -k[1] % m, -k[2] % m] += np.conj(a)
    c.setflags(write=False)
    return c


@dataclass(frozen=True)
class SolverState:
    """Velocity state plus running energy-bookkeeping integrals."""

    u: SpectralField
    t: float = 0.0
    step_count: int = 0
    dissipation_integral: float = 0.0
    forcing_work_integral: float = 0.0
    max_speed: float | None = None


def init_taylor_green(grid: GridSpec) -> SolverState:
    """Taylor-Green vortex (sin cos, -cos sin, 0): four exact mode pairs.

    The coefficients are set analytically so the divergence k . c^k is zero
    in exact arithmetic, not merely to transform round-off.
    """
    a = -0.25j
    modes = {
        (1, 1, 0): (a, -a, 0.0),
        (1, -1, 0): (a, a, 0.0),
        (-1, 1, 0): (-a, -a, 0.0),
        (-1, -1, 0): (-a, a, 0.0),
    }
    u = field_from_modes(grid, modes, divergence_free=True, hermitian=True)
    return SolverState(u=u)


def kinetic_energy(u: SpectralField) -> float:
    """0.5 |u|^2 over the unit torus."""
    return 0.5 * float(np.sum(np.abs(u.coeffs) ** 2))


@lru_cache(maxsize=64)
def _step_factors(m: int, nu_dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact viscous factors over a half step and a full step."""
    lam = (4.0 * np.pi**2) * wavenumber_sq(m).astype(np.float64)
    e_half = np.exp(-0.5 * nu_dt * lam)
    e_full = np.exp(-nu_dt * lam)
    e_half.setflags(write=False)
    e_full.setflags(write=False)
    return e_half, e_full


def _lambda_grid(m: int) -> np.ndarray:
    return (4.0 * np.pi**2) * wavenumber_sq(m).astype(np.float64)


def _dissipation(c: np.ndarray, lam: np.ndarray) -> float:
    return float(np.sum(lam * (np.abs(c) ** 2).sum(axis=0)))


def _forcing_work(c: np.ndarray, f: np.ndarray | None) -> float:
    if f is None:
        return 0.0
    return float(np.real(np.sum(f * np.conj(c))))


def _rhs(c: np.ndarray, grid: GridSpec, f: np.ndarray | None, nonlinear: bool):
    """Nonviscous right-hand side -P(u.grad u) + f and the stage speed."""
    if nonlinear:
        adv, max_speed = _nonlinear_raw(c, grid)
        rhs = -adv
    else:
        rhs = np.zeros_like(c)
        max_speed = None
    if f is not None:
        rhs = rhs + _leray_raw(f, grid.modes_per_dim)
    return rhs, max_speed


def step(state: SolverState, cfg: TimeConfig, forcing: ForcingSpec = ForcingSpec.zero()) -> SolverState:
    """Advance one time step with integrating-factor RK4.

    Raises BlowupError when the new coefficients are not all finite.
    """
    grid = state.u.grid
    m = grid.modes_per_dim
    dt = cfg.dt
    e_half, e_full = _step_factors(m, grid.viscosity * dt)
    lam = _lambda_grid(m)
    f = _forcing_coeffs(forcing, grid)
    c = state.u.coeffs

    n1, max_speed = _rhs(c, grid, f, cfg.nonlinear)
    u2 = e_half * (c + (dt / 2.0) * n1)
    n2, _ = _rhs(u2, grid, f, cfg.nonlinear)
    u3 = e_half * c + (dt / 2.0) * n2
    n3, _ = _rhs(u3, grid, f, cfg.nonlinear)
    u4 = e_full * c + dt * (e_half * n3)
    n4, _ = _rhs(u4, grid, f, cfg.nonlinear)

    c_new = e_full * c + (dt / 6.0) * (e_full * n1 + 2.0 * e_half * (n2 + n3) + n4)
    c_new[:, 0, 0, 0] = 0.0

    new_t = state.t + dt
    if not np.all(np.isfinite(c_new)):
        raise BlowupError(new_t, state.step_count + 1, "non-finite coefficients")

    diss = state.dissipation_integral + (dt / 6.0) * (
        _dissipation(c, lam) + 2.0 * _dissipation(u2, lam)
        + 2.0 * _dissipation(u3, lam) + _dissipation(u4, lam)
    )
    work = state.forcing_work_integral + (dt / 6.0) * (
        _forcing_work(c, f) + 2.0 * _forcing_work(u2, f)
        + 2.0 * _forcing_work(u3, f) + _forcing_work(u4, f)
    )

    if max_speed is not None and max_speed * dt * m > cfg.cfl_limit:
        logger.debug("advective CFL %.3g exceeds limit %.3g at t=%.6g",
                     max_speed * dt * m, cfg.cfl_limit, new_t)

    return SolverState(
        u=SpectralField(grid, c_new, divergence_free=True, hermitian=state.u.hermitian),
        t=new_t,
        step_count=state.step_count + 1,
        dissipation_integral=diss,
        forcing_work_integral=work,
        max_speed=max_speed,
    )


@dataclass(frozen=True)
class RunReport:
    """Outcome of a run: status, energy bookkeeping, and the final state."""

    status: str
    final_state: SolverState
    steps_completed: int
    initial_kinetic_energy: float
    final_kinetic_energy: float
    dissipation_integral: float
    forcing_work_integral: float
    energy_balance_residual: float
    energy_balance_relative: float
    blowup_time: float | None = None
    blowup_reason: str | None = None
    cfl_exceedances: int = 0
    wall_seconds: float = 0.0


def _energy_balance(e0: float, report_state: SolverState, nu: float) -> tuple[float, float]:
    e_end = 2.0 * kinetic_energy(report_state.u)
    residual = abs(
        e_end - e0 + 2.0 * nu * report_state.dissipation_integral
        - 2.0 * report_state.forcing_work_integral
    )
    scale = max(e0, e_end, 1e-300)
    return residual, residual / scale


def run(
    state: SolverState,
    cfg: TimeConfig,
    forcing: ForcingSpec = ForcingSpec.zero(),
    observers=(),
) -> RunReport:
    """Step to t_end, invoking each observer with every state (initial one
    included).  A blowup ends the run early with a partial report."""
    t_start = _time.perf_counter()
    grid = state.u.grid
    initial_l2 = state.u.l2_norm()
    e0 = initial_l2**2
    n_steps = max(0, math.ceil((cfg.t_end - state.t) / cfg.dt - 1e-12))

    for obs in observers:
        obs(state)

    status = "completed"
    blowup_time = None
    blowup_reason = None
    cfl_count = 0
    steps_done = 0
    try:
        for _ in range(n_steps):
            state = step(state, cfg, forcing)
            steps_done += 1
            if state.max_speed is not None and state.max_speed * cfg.dt * grid.modes_per_dim > cfg.cfl_limit:
                if cfl_count == 0:
                    logger.warning(
                        "advective CFL number %.3g exceeds advisory limit %.3g at t=%.6g",
                        state.max_speed * cfg.dt * grid.modes_per_dim, cfg.cfl_limit, state.t,
                    )
                cfl_count += 1
            norm = state.u.l2_norm()
            if initial_l2 > 0.0 and norm > GROWTH_LIMIT * initial_l2:
                raise BlowupError(state.t, state.step_count,
                                  f"norm grew {norm / initial_l2:.3g}x beyond the initial value")
            for obs in observers:
                obs(state)
    except BlowupError as exc:
        status = "blowup"
        blowup_time = exc.time
        blowup_reason = exc.reason

    residual, relative = _energy_balance(e0, state, grid.viscosity)
    return RunReport(
        status=status,
        final_state=state,
        steps_completed=steps_done,
        initial_kinetic_energy=0.5 * e0,
        final_kinetic_energy=kinetic_energy(state.u),
        dissipation_integral=state.dissipation_integral,
        forcing_work_integral=state.forcing_work_integral,
        energy_balance_residual=residual,
        energy_balance_relative=relative,
        blowup_time=blowup_time,
        blowup_reason=blowup_reason,
        cfl_exceedances=cfl_count,
        wall_seconds=_time.perf_counter() - t_start,
    )


def coupled_step(
    v: SpectralField,
    w: SpectralField,
    n: int,
    cfg: TimeConfig,
    forcing: ForcingSpec = ForcingSpec.zero(),
) -> tuple[SpectralField, SpectralField]:
    """Advance the low band v and the high band w as coupled sub-systems.

    Both equations share the single nonlinear evaluation of v + w; each
    sub-system receives its banded part of every stage increment, so the
    supports are preserved structurally and v + w reproduces the monolithic
    step exactly.
    """
    if v.grid != w.grid:
        raise ValueError("coupled step requires both bands on the same grid")
    grid = v.grid
    m = grid.modes_per_dim
    high = genuine3d_mask(m, int(n))
    if np.any(v.coeffs[:, high] != 0):
        raise ValueError(f"low-band field carries modes above the cut N={n}")
    if np.any(w.coeffs[:, ~high] != 0):
        raise ValueError(f"high-band field carries modes below the cut N={n}")

    dt = cfg.dt
    e_half, e_full = _step_factors(m, grid.viscosity * dt)
    f = _forcing_coeffs(forcing, grid)
    low = ~high

    cv, cw = v.coeffs, w.coeffs

    def stage_pair(nl: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return nl * low, nl * high

    n1, _ = _rhs(cv + cw, grid, f, cfg.nonlinear)
    p1, q1 = stage_pair(n1)
    v2 = e_half * (cv + (dt / 2.0) * p1)
    w2 = e_half * (cw + (dt / 2.0) * q1)
    n2, _ = _rhs(v2 + w2, grid, f, cfg.nonlinear)
    p2, q2 = stage_pair(n2)
    v3 = e_half * cv + (dt / 2.0) * p2
    w3 = e_half * cw + (dt / 2.0) * q2
    n3, _ = _rhs(v3 + w3, grid, f, cfg.nonlinear)
    p3, q3 = stage_pair(n3)
    v4 = e_full * cv + dt * (e_half * p3)
    w4 = e_full * cw + dt * (e_half * q3)
    n4, _ = _rhs(v4 + w4, grid, f, cfg.nonlinear)
    p4, q4 = stage_pair(n4)

    cv_new = e_full * cv + (dt / 6.0) * (e_full * p1 + 2.0 * e_half * (p2 + p3) + p4)
    cw_new = e_full * cw + (dt / 6.0) * (e_full * q1 + 2.0 * e_half * (q2 + q3) + q4)
    cv_new[:, 0, 0, 0] = 0.0

    if not (np.all(np.isfinite(cv_new)) and np.all(np.isfinite(cw_new))):
        raise BlowupError(0.0, 0, "non-finite coefficients in coupled step")
    herm = v.hermitian and w.hermitian
    return (
        SpectralField(grid, cv_new, divergence_free=True, hermitian=herm),
        SpectralField(grid, cw_new, divergence_free=True, hermitian=herm),
    )
