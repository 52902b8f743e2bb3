"""TOML run and analysis configuration.

Validation happens at load time and error messages name the offending
table and field, so a bad config fails before any solver work starts.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .fields import GridSpec
from .solver import ForcingSpec, TimeConfig
from .verify import EMBEDDING, INTERPOLATION_BOUND, SLAB_BOUND


class ConfigError(ValueError):
    """Configuration file is unreadable or fails validation."""


@dataclass(frozen=True)
class MonitorPair:
    q: float
    r: float
    gradient_form: bool = False


@dataclass(frozen=True)
class MonitorSpec:
    n_list: tuple = (1, 2, 4)
    pairs: tuple = (MonitorPair(q=3.0, r=math.inf),)
    delta_list: tuple = (2.5, 3.0)
    window: int = 8
    stride: int = 1
    sobolev_orders: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    time: TimeConfig
    initial_kind: str                 # taylor_green | random | snapshot
    initial_exponent: float = 2.0
    initial_seed: int = 0
    initial_path: str | None = None
    forcing: ForcingSpec = ForcingSpec.zero()
    monitor: MonitorSpec = MonitorSpec()
    snapshot_stride: int = 0
    output_directory: str = "run"


@dataclass(frozen=True)
class InequalityRequest:
    inequality: str
    q: float = 4.0
    samples: int = 200
    seed: int = 0
    modes: int = 32
    dimension: int = 2
    component: int = 1
    n_list: tuple = (1, 2, 4, 8)
    check_doubling: bool = True


@dataclass(frozen=True)
class VerifySpec:
    requests: tuple
    output_directory: str = "verify"


def _load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return _toml.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}")


def _get(table: dict, context: str, key: str, kind, default=...):
    if key not in table:
        if default is ...:
            raise ConfigError(f"missing required field {context}.{key}")
        return default
    value = table[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"field {context}.{key} has wrong type: expected "
                          f"{getattr(kind, '__name__', kind)}, got {value!r}")
    return value


def _build(context: str, ctor, **kwargs):
    try:
        return ctor(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid {context}: {exc}")


def _parse_monitor(table: dict) -> MonitorSpec:
    n_list = tuple(int(n) for n in _get(table, "monitor", "n_list", list, [1, 2, 4]))
    pairs = []
    for i, entry in enumerate(_get(table, "monitor", "pairs", list, [])):
        ctx = f"monitor.pairs[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{ctx} must be a table with q and r")
        pairs.append(MonitorPair(
            q=_get(entry, ctx, "q", float),
            r=_get(entry, ctx, "r", float),
            gradient_form=_get(entry, ctx, "gradient_form", bool, False),
        ))
    if not pairs:
        pairs = [MonitorPair(q=3.0, r=math.inf)]
    return MonitorSpec(
        n_list=n_list,
        pairs=tuple(pairs),
        delta_list=tuple(float(d) for d in _get(table, "monitor", "delta_list", list, [2.5, 3.0])),
        window=_get(table, "monitor", "window", int, 8),
        stride=_get(table, "monitor", "stride", int, 1),
        sobolev_orders=tuple(float(s) for s in _get(table, "monitor", "sobolev_orders", list, [])),
    )


def _parse_forcing(table: dict) -> ForcingSpec:
    modes = []
    for i, entry in enumerate(_get(table, "forcing", "modes", list, [])):
        ctx = f"forcing.modes[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{ctx} must be a table with k and amplitude_re")
        k = _get(entry, ctx, "k", list)
        re = _get(entry, ctx, "amplitude_re", list)
        im = _get(entry, ctx, "amplitude_im", list, [0.0, 0.0, 0.0])
        if len(k) != 3 or len(re) != 3 or len(im) != 3:
            raise ConfigError(f"{ctx}: k, amplitude_re, amplitude_im must have 3 entries")
        amp = tuple(complex(float(a), float(b)) for a, b in zip(re, im))
        modes.append((tuple(int(x) for x in k), amp))
    return _build("forcing", ForcingSpec, modes=tuple(modes))


def load_run_config(path) -> RunConfig:
    doc = _load_toml(path)

    grid_tab = _get(doc, "config", "grid", dict)
    grid = _build("grid", GridSpec,
                  modes_per_dim=_get(grid_tab, "grid", "modes_per_dim", int),
                  viscosity=_get(grid_tab, "grid", "viscosity", float),
                  dealias_fraction=_get(grid_tab, "grid", "dealias_fraction", float, 2.0 / 3.0))

    time_tab = _get(doc, "config", "time", dict)
    time_cfg = _build("time", TimeConfig,
                      dt=_get(time_tab, "time", "dt", float),
                      t_end=_get(time_tab, "time", "t_end", float),
                      cfl_limit=_get(time_tab, "time", "cfl_limit", float, 0.5),
                      nonlinear=_get(time_tab, "time", "nonlinear", bool, True))
    snapshot_stride = _get(time_tab, "time", "snapshot_stride", int, 0)
    if snapshot_stride < 0:
        raise ConfigError("field time.snapshot_stride must be >= 0")

    init_tab = _get(doc, "config", "initial", dict)
    kind = _get(init_tab, "initial", "kind", str)
    if kind not in ("taylor_green", "random", "snapshot"):
        raise ConfigError(f"field initial.kind must be taylor_green, random, or snapshot, got {kind!r}")
    initial_path = _get(init_tab, "initial", "path", str, None)
    if kind == "snapshot":
        if initial_path is None:
            raise ConfigError("missing required field initial.path for snapshot start")
        if not Path(initial_path).is_file():
            raise ConfigError(f"field initial.path does not resolve to a file: {initial_path}")

    out_tab = _get(doc, "config", "output", dict, {})
    monitor = _parse_monitor(_get(doc, "config", "monitor", dict, {}))
    forcing = _parse_forcing(_get(doc, "config", "forcing", dict, {}))

    return RunConfig(
        grid=grid,
        time=time_cfg,
        initial_kind=kind,
        initial_exponent=_get(init_tab, "initial", "exponent", float, 2.0),
        initial_seed=_get(init_tab, "initial", "seed", int, 0),
        initial_path=initial_path,
        forcing=forcing,
        monitor=monitor,
        snapshot_stride=snapshot_stride,
        output_directory=_get(out_tab, "output", "directory", str, "run"),
    )


def load_monitor_spec(path) -> tuple[MonitorSpec, str]:
    """Monitor spec plus output directory, for offline analysis."""
    doc = _load_toml(path)
    monitor = _parse_monitor(_get(doc, "config", "monitor", dict, {}))
    out_tab = _get(doc, "config", "output", dict, {})
    return monitor, _get(out_tab, "output", "directory", str, "analysis")


_KNOWN_INEQUALITIES = (EMBEDDING, SLAB_BOUND, INTERPOLATION_BOUND)


def load_verify_spec(path) -> VerifySpec:
    doc = _load_toml(path)
    out_tab = _get(doc, "config", "output", dict, {})
    entries = _get(doc, "config", "inequality", list, None)
    if entries is None:
        requests = tuple(default_verify_requests())
    else:
        requests = []
        for i, entry in enumerate(entries):
            ctx = f"inequality[{i}]"
            if not isinstance(entry, dict):
                raise ConfigError(f"{ctx} must be a table")
            ineq = _get(entry, ctx, "id", str)
            if ineq not in _KNOWN_INEQUALITIES:
                raise ConfigError(f"{ctx}.id must be one of {_KNOWN_INEQUALITIES}, got {ineq!r}")
            samples = _get(entry, ctx, "samples", int, 200)
            if samples < 1:
                raise ConfigError(f"field {ctx}.samples must be positive, got {samples!r}")
            requests.append(InequalityRequest(
                inequality=ineq,
                q=_get(entry, ctx, "q", float, 4.0),
                samples=samples,
                seed=_get(entry, ctx, "seed", int, 0),
                modes=_get(entry, ctx, "modes", int, 32),
                dimension=_get(entry, ctx, "dimension", int, 2),
                component=_get(entry, ctx, "component", int, 1),
                n_list=tuple(int(n) for n in _get(entry, ctx, "n_list", list, [1, 2, 4, 8])),
                check_doubling=_get(entry, ctx, "doubling", bool, True),
            ))
        requests = tuple(requests)
    return VerifySpec(requests=requests,
                      output_directory=_get(out_tab, "output", "directory", str, "verify"))


def default_verify_requests() -> list[InequalityRequest]:
    """The stock verification suite at modest resolution."""
    return [
        InequalityRequest(inequality=EMBEDDING, dimension=2, q=4.0,
                          samples=200, seed=11, modes=32),
        InequalityRequest(inequality=SLAB_BOUND, q=4.0, component=1,
                          n_list=(1, 2, 4), samples=200, seed=12, modes=32),
        InequalityRequest(inequality=INTERPOLATION_BOUND, q=4.0,
                          n_list=(1, 2, 4), samples=200, seed=13, modes=32),
    ]
