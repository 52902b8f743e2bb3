"""Command-line entry points.

    torusns run <config.toml>          integrate and monitor a configured run
    torusns analyze <spec.toml> <snapshots...>   recompute reports offline
    torusns verify <spec.toml>         sample the embedding inequalities

Exit status: 0 success, 2 configuration error, 3 solver blowup observed,
4 inequality verification failure.  TORUSNS_OUTPUT_ROOT, when set, anchors
relative output directories.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time as _time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import (
    ConfigError,
    InequalityRequest,
    RunConfig,
    load_monitor_spec,
    load_run_config,
    load_verify_spec,
)
from .fields import forward_transform, inverse_transform
from .monitor import EnergyMonitor, SerrinMonitor, SpectrumSnapshotMonitor, SpectrumWeightMonitor
from .operators import random_divfree_field
from .reports import (
    energy_csv,
    inequality_csv,
    inequality_summary_csv,
    serrin_csvs,
    spectrum_csv,
    spectrum_weight_csv,
    y_series_csv,
)
from .snapshots import SnapshotError, read_snapshot, write_snapshot
from .solver import SolverState, init_taylor_green, run
from .spectra import energy_spectrum
from .verify import EMBEDDING, SLAB_BOUND, verify_fractional_embedding, verify_low_band_bounds
from . import plots

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_VERIFY = 4


def _resolve_output(directory: str) -> Path:
    path = Path(directory)
    root = os.environ.get("TORUSNS_OUTPUT_ROOT")
    if root and not path.is_absolute():
        path = Path(root) / path
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(outdir: Path, command: str, config_file, status: str,
                    wall_seconds: float, extra=None) -> None:
    manifest = {
        "command": command,
        "config_file": str(config_file) if config_file else None,
        "config_text": Path(config_file).read_text() if config_file else None,
        "versions": {
            "torusns": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "status": status,
        "wall_seconds": wall_seconds,
    }
    if extra:
        manifest.update(extra)
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


class SnapshotWriter:
    """Observer that writes binary snapshots every `stride` steps."""

    def __init__(self, directory: Path, stride: int):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.stride = int(stride)
        self.written: list[Path] = []

    def __call__(self, state: SolverState) -> None:
        if state.step_count % self.stride:
            return
        path = self.directory / f"snap_{state.step_count:06d}.tnsf"
        write_snapshot(path, inverse_transform(state.u), state.t)
        self.written.append(path)


def _initial_state(cfg: RunConfig) -> SolverState:
    if cfg.initial_kind == "taylor_green":
        return init_taylor_green(cfg.grid)
    if cfg.initial_kind == "random":
        u = random_divfree_field(cfg.grid, cfg.initial_exponent, cfg.initial_seed)
        return SolverState(u=u)
    field, t = read_snapshot(cfg.initial_path, dealias_fraction=cfg.grid.dealias_fraction)
    if field.grid.modes_per_dim != cfg.grid.modes_per_dim:
        raise ConfigError(
            f"initial.path snapshot resolution {field.grid.modes_per_dim} "
            f"does not match grid.modes_per_dim {cfg.grid.modes_per_dim}")
    return SolverState(u=forward_transform(field), t=t)


def _build_monitors(cfg_monitor, grid):
    serrin = [
        SerrinMonitor(cfg_monitor.n_list, pair.q, pair.r,
                      gradient_form=pair.gradient_form, stride=cfg_monitor.stride,
                      sobolev_orders=cfg_monitor.sobolev_orders)
        for pair in cfg_monitor.pairs
    ]
    weights = [
        SpectrumWeightMonitor(n, cfg_monitor.delta_list,
                              window=cfg_monitor.window, stride=cfg_monitor.stride)
        for n in cfg_monitor.n_list
    ] if cfg_monitor.delta_list else []
    return serrin, weights


def _emit_run_reports(outdir: Path, serrin_monitors, weight_monitors,
                      energy_mon, spectrum_mon, complete: bool) -> None:
    figures = outdir / "figures"
    energy_csv(outdir / "energy.csv", energy_mon.times, energy_mon.kinetic, energy_mon.y)
    plots.plot_energy(energy_mon.times, energy_mon.kinetic, energy_mon.y,
                      figures / "energy.png")
    for i, mon in enumerate(serrin_monitors):
        report = mon.report(complete=complete)
        serrin_csvs(outdir, report)
        if i == 0:
            y_series_csv(outdir / "y_series.csv", report)
        plots.plot_serrin(report, figures / f"serrin_{i}.png")
    for mon in weight_monitors:
        report = mon.report()
        spectrum_weight_csv(outdir / f"spectrum_weight_N{report.cut_level}.csv", report)
        plots.plot_spectrum_weight(report, figures / f"spectrum_weight_N{report.cut_level}.png")
    if spectrum_mon.latest is not None:
        spectrum_csv(outdir / "spectrum.csv", spectrum_mon.latest)
        plots.plot_spectrum(spectrum_mon.latest, figures / "spectrum.png",
                            title=f"t = {spectrum_mon.latest_time:g}")


def cmd_run(config_path: str) -> int:
    started = _time.perf_counter()
    cfg = load_run_config(config_path)
    outdir = _resolve_output(cfg.output_directory)
    state = _initial_state(cfg)

    serrin_monitors, weight_monitors = _build_monitors(cfg.monitor, cfg.grid)
    energy_mon = EnergyMonitor()
    spectrum_mon = SpectrumSnapshotMonitor()
    observers = [energy_mon, spectrum_mon, *serrin_monitors, *weight_monitors]
    if cfg.snapshot_stride > 0:
        observers.append(SnapshotWriter(outdir / "snapshots", cfg.snapshot_stride))

    report = run(state, cfg.time, cfg.forcing, observers)
    complete = report.status == "completed"
    _emit_run_reports(outdir, serrin_monitors, weight_monitors,
                      energy_mon, spectrum_mon, complete)

    run_report = {
        "status": report.status,
        "steps_completed": report.steps_completed,
        "initial_kinetic_energy": report.initial_kinetic_energy,
        "final_kinetic_energy": report.final_kinetic_energy,
        "dissipation_integral": report.dissipation_integral,
        "forcing_work_integral": report.forcing_work_integral,
        "energy_balance_residual": report.energy_balance_residual,
        "energy_balance_relative": report.energy_balance_relative,
        "blowup_time": report.blowup_time,
        "blowup_reason": report.blowup_reason,
        "cfl_exceedances": report.cfl_exceedances,
        "final_time": report.final_state.t,
    }
    with open(outdir / "run_report.json", "w") as fh:
        json.dump(run_report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(outdir, "run", config_path, report.status,
                    _time.perf_counter() - started)
    if report.status == "blowup":
        logger.warning("solver blowup at t=%s: %s", report.blowup_time, report.blowup_reason)
        return EXIT_BLOWUP
    return EXIT_OK


def cmd_analyze(spec_path: str, snapshot_paths) -> int:
    started = _time.perf_counter()
    monitor_spec, out_directory = load_monitor_spec(spec_path)
    if not snapshot_paths:
        raise ConfigError("analyze requires at least one snapshot file")
    outdir = _resolve_output(out_directory)

    loaded = []
    for p in snapshot_paths:
        field, t = read_snapshot(p)
        loaded.append((t, p, field))
    loaded.sort(key=lambda item: item[0])
    first = loaded[0][2].grid
    for t, p, field in loaded:
        if (field.grid.modes_per_dim, field.grid.viscosity) != (first.modes_per_dim, first.viscosity):
            raise ConfigError(f"snapshot {p} grid differs from {loaded[0][1]}")
    times = [t for t, _, _ in loaded]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError("snapshot times must be strictly increasing")

    serrin_monitors, weight_monitors = _build_monitors(monitor_spec, first)
    energy_mon = EnergyMonitor()
    spectrum_mon = SpectrumSnapshotMonitor()
    observers = [energy_mon, spectrum_mon, *serrin_monitors, *weight_monitors]
    for i, (t, _, field) in enumerate(loaded):
        state = SolverState(u=forward_transform(field), t=t, step_count=i)
        for obs in observers:
            obs(state)

    _emit_run_reports(outdir, serrin_monitors, weight_monitors,
                      energy_mon, spectrum_mon, complete=True)
    _write_manifest(outdir, "analyze", spec_path, "completed",
                    _time.perf_counter() - started,
                    extra={"snapshots": [str(p) for _, p, _ in loaded]})
    return EXIT_OK


def _run_request(req: InequalityRequest):
    if req.inequality == EMBEDDING:
        return verify_fractional_embedding(
            dimension=req.dimension, q=req.q, samples=req.samples,
            seed=req.seed, modes=req.modes, check_doubling=req.check_doubling)
    if req.inequality == SLAB_BOUND:
        return verify_low_band_bounds(
            SLAB_BOUND, q=req.q, n_list=req.n_list, samples=req.samples,
            seed=req.seed, modes=req.modes, component=req.component)
    return verify_low_band_bounds(
        req.inequality, q=req.q, n_list=req.n_list, samples=req.samples,
        seed=req.seed, modes=req.modes)


def cmd_verify(spec_path: str) -> int:
    started = _time.perf_counter()
    spec = load_verify_spec(spec_path)
    outdir = _resolve_output(spec.output_directory)

    reports = []
    try:
        for req in spec.requests:
            logger.info("verifying %s (modes=%d, samples=%d)",
                        req.inequality, req.modes, req.samples)
            reports.append(_run_request(req))
    except ValueError as exc:
        raise ConfigError(str(exc))

    for i, report in enumerate(reports):
        inequality_csv(outdir / f"inequality_{i}_{report.inequality}.csv", report)
    inequality_summary_csv(outdir / "inequality_summary.csv", reports)
    plots.plot_inequalities(reports, outdir / "figures" / "inequality_ratios.png")

    failures = sorted({r.inequality for r in reports if not r.stable})
    _write_manifest(outdir, "verify", spec_path,
                    "failed" if failures else "completed",
                    _time.perf_counter() - started,
                    extra={"failures": failures})
    if failures:
        print("verification failed for: " + ", ".join(failures), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusns",
        description="Pseudo-spectral Navier-Stokes solver and spectral-band diagnostics",
    )
    parser.add_argument("--version", action="version", version=f"torusns {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a configured run")
    p_run.add_argument("config", help="TOML run configuration")

    p_an = sub.add_parser("analyze", help="recompute reports from snapshots")
    p_an.add_argument("spec", help="TOML monitor specification")
    p_an.add_argument("snapshots", nargs="*", help="snapshot files sharing one grid")

    p_ver = sub.add_parser("verify", help="sample the embedding inequalities")
    p_ver.add_argument("spec", help="TOML verification specification")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config)
        if args.command == "analyze":
            return cmd_analyze(args.spec, args.snapshots)
        return cmd_verify(args.spec)
    except (ConfigError, SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
