"""Delimited report emission.

Floats are written with repr (shortest round-trip form) and rows end with
a bare newline regardless of platform, so identical runs produce byte-
identical files.
"""

from __future__ import annotations

import math
from pathlib import Path

from .monitor import CriterionReport, SpectrumReport
from .spectra import ShellSpectrum
from .verify import InequalityReport


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def spectrum_csv(path, spec: ShellSpectrum) -> None:
    write_csv(path, ("kappa", "energy"), zip(spec.kappa.tolist(), spec.energy.tolist()))


def energy_csv(path, times, kinetic, y) -> None:
    write_csv(path, ("time", "kinetic_energy", "enstrophy_level"), zip(times, kinetic, y))


def _pair_tag(q: float, r: float, gradient_form: bool) -> str:
    rtag = "inf" if r == math.inf else fmt(float(r))
    tag = f"q{fmt(float(q))}_r{rtag}"
    return tag + ("_grad" if gradient_form else "")


def serrin_series_paths(directory, report: CriterionReport) -> list:
    directory = Path(directory)
    return [
        directory / f"serrin_{_pair_tag(row.q, row.r, row.gradient_form)}_N{row.cut_level}.csv"
        for row in report.rows
    ]


def serrin_csvs(directory, report: CriterionReport) -> list:
    """One time-series file per cut level plus a summary; returns the paths."""
    paths = serrin_series_paths(directory, report)
    for row, path in zip(report.rows, paths):
        write_csv(path, ("time", "lq_value", "running_norm"),
                  zip(report.times, row.values, row.running))
    summary = Path(directory) / f"serrin_{_pair_tag(report.rows[0].q, report.rows[0].r, report.rows[0].gradient_form)}_summary.csv"
    write_csv(
        summary,
        ("cut_level", "q", "r", "gradient_form", "scaling", "final_norm"),
        [
            (row.cut_level, float(row.q), row.r, row.gradient_form,
             row.scaling or "none", row.final_norm)
            for row in report.rows
        ],
    )
    liminf = Path(directory) / f"serrin_{_pair_tag(report.rows[0].q, report.rows[0].r, report.rows[0].gradient_form)}_liminf.csv"
    write_csv(liminf, ("liminf_proxy", "complete"), [(report.liminf_proxy, report.complete)])
    return paths + [summary, liminf]


def y_series_csv(path, report: CriterionReport) -> None:
    header = ["time", "enstrophy_level"]
    columns = [report.times, report.y_series]
    for s, series in sorted(report.sobolev_series.items()):
        header.append(f"sobolev_s{fmt(float(s))}")
        columns.append(series)
    write_csv(path, header, zip(*columns))


def spectrum_weight_csv(path, report: SpectrumReport) -> None:
    rows = []
    for j, d in enumerate(report.delta_list):
        for i, t in enumerate(report.times):
            rows.append((t, float(d), report.weights[j][i], report.trailing_min[j][i]))
    write_csv(path, ("time", "delta", "sup_weight", "trailing_min"), rows)


def inequality_csv(path, report: InequalityReport) -> None:
    if report.per_level:
        write_csv(path, ("cut_level", "max_ratio", "samples_used"), report.per_level)
    else:
        write_csv(path, ("modes", "max_ratio", "samples_used"), report.per_resolution)


def inequality_summary_csv(path, reports) -> None:
    write_csv(
        path,
        ("inequality", "max_ratio", "samples_used", "growth", "doubling_ratio", "stable"),
        [
            (r.inequality, r.max_ratio, r.samples_used,
             r.growth if r.growth is not None else "",
             r.doubling_ratio if r.doubling_ratio is not None else "",
             r.stable)
            for r in reports
        ],
    )
