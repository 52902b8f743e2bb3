"""End-to-end command-line behavior: artifacts, exit codes, determinism."""

import json
import math

import numpy as np
import pytest

from torusns.cli import EXIT_BLOWUP, EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, main

TG_RUN = """
[grid]
modes_per_dim = 16
viscosity = 0.01

[time]
dt = 1e-3
t_end = 5e-3
snapshot_stride = 1

[initial]
kind = "taylor_green"

[monitor]
n_list = [1, 2]
pairs = [ { q = 3.0, r = inf } ]
delta_list = [2.5]

[output]
directory = "%s"
"""


def write_config(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestRunCommand:
    def test_taylor_green_run_artifacts(self, tmp_path):
        outdir = tmp_path / "out"
        cfg = write_config(tmp_path, TG_RUN % outdir)
        assert main(["run", str(cfg)]) == EXIT_OK

        assert (outdir / "manifest.json").is_file()
        assert (outdir / "run_report.json").is_file()
        assert (outdir / "energy.csv").is_file()
        assert (outdir / "spectrum.csv").is_file()
        assert (outdir / "figures" / "energy.png").is_file()
        assert len(list((outdir / "snapshots").glob("*.tnsf"))) == 6

        # the high band of a two-dimensional flow is empty at every cut
        for n in (1, 2):
            _, rows = read_csv(outdir / f"serrin_q3.0_rinf_N{n}.csv")
            assert len(rows) == 6
            assert all(float(r[1]) == 0.0 and float(r[2]) == 0.0 for r in rows)

        report = json.loads((outdir / "run_report.json").read_text())
        assert report["status"] == "completed"
        assert report["energy_balance_relative"] <= 1e-8

    def test_determinism_byte_identical_reports(self, tmp_path):
        text = TG_RUN.replace('kind = "taylor_green"',
                              'kind = "random"\nexponent = 2.0\nseed = 5')
        out1, out2 = tmp_path / "a", tmp_path / "b"
        cfg1 = write_config(tmp_path, text % out1, "a.toml")
        cfg2 = write_config(tmp_path, text % out2, "b.toml")
        assert main(["run", str(cfg1)]) == EXIT_OK
        assert main(["run", str(cfg2)]) == EXIT_OK
        compared = 0
        for f1 in sorted(out1.rglob("*")):
            if f1.suffix not in (".csv", ".tnsf"):
                continue
            f2 = out2 / f1.relative_to(out1)
            assert f2.is_file(), f2
            assert f1.read_bytes() == f2.read_bytes(), f1.name
            compared += 1
        assert compared >= 8

    def test_bad_dt_exits_with_config_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, (TG_RUN % (tmp_path / "x")).replace(
            "dt = 1e-3", "dt = -1e-3"))
        assert main(["run", str(cfg)]) == EXIT_CONFIG
        assert "dt" in capsys.readouterr().err

    def test_blowup_exits_3_with_partial_artifacts(self, tmp_path):
        outdir = tmp_path / "blow"
        text = (TG_RUN % outdir).replace("dt = 1e-3", "dt = 0.5").replace(
            "t_end = 5e-3", "t_end = 5.0").replace(
            'kind = "taylor_green"', 'kind = "random"\nexponent = 1.0\nseed = 1')
        text += """
[forcing]
modes = [ { k = [1, 0, 0], amplitude_re = [0.0, 1e160, 0.0] } ]
"""
        cfg = write_config(tmp_path, text)
        assert main(["run", str(cfg)]) == EXIT_BLOWUP
        report = json.loads((outdir / "run_report.json").read_text())
        assert report["status"] == "blowup"
        assert (outdir / "energy.csv").is_file()

    def test_output_root_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TORUSNS_OUTPUT_ROOT", str(tmp_path / "root"))
        cfg = write_config(tmp_path, TG_RUN % "rel_dir")
        assert main(["run", str(cfg)]) == EXIT_OK
        assert (tmp_path / "root" / "rel_dir" / "energy.csv").is_file()


ANALYZE_SPEC = """
[monitor]
n_list = [1, 2]
pairs = [ { q = 3.0, r = inf } ]
delta_list = [2.5]

[output]
directory = "%s"
"""


class TestAnalyzeCommand:
    def _run_and_analyze(self, tmp_path, run_dir, analyze_dir):
        text = (TG_RUN % run_dir).replace(
            'kind = "taylor_green"', 'kind = "random"\nexponent = 2.0\nseed = 9')
        cfg = write_config(tmp_path, text, "run.toml")
        assert main(["run", str(cfg)]) == EXIT_OK
        spec = write_config(tmp_path, ANALYZE_SPEC % analyze_dir, "analyze.toml")
        snaps = sorted(str(p) for p in (run_dir / "snapshots").glob("*.tnsf"))
        assert main(["analyze", str(spec), *snaps]) == EXIT_OK

    def test_reproduces_in_run_values(self, tmp_path):
        run_dir, analyze_dir = tmp_path / "run", tmp_path / "ana"
        self._run_and_analyze(tmp_path, run_dir, analyze_dir)
        for name in ("serrin_q3.0_rinf_N1.csv", "serrin_q3.0_rinf_N2.csv"):
            _, run_rows = read_csv(run_dir / name)
            _, ana_rows = read_csv(analyze_dir / name)
            assert len(run_rows) == len(ana_rows)
            for a, b in zip(run_rows, ana_rows):
                assert float(a[0]) == float(b[0])
                for x, y in zip(a[1:], b[1:]):
                    assert abs(float(x) - float(y)) <= 1e-12 * max(1.0, abs(float(x)))

    def test_empty_snapshot_list_is_config_error(self, tmp_path, capsys):
        spec = write_config(tmp_path, ANALYZE_SPEC % (tmp_path / "z"), "a.toml")
        assert main(["analyze", str(spec)]) == EXIT_CONFIG
        assert "snapshot" in capsys.readouterr().err

    def test_single_snapshot_sup_equals_value(self, tmp_path):
        from torusns import GridSpec, inverse_transform, random_divfree_field, write_snapshot
        from torusns import genuine3d_cut, lq_norm

        grid = GridSpec(16, 0.01)
        u = random_divfree_field(grid, 1.5, seed=10)
        snap = tmp_path / "one.tnsf"
        write_snapshot(snap, inverse_transform(u), time=0.0)
        outdir = tmp_path / "single"
        spec = write_config(tmp_path, ANALYZE_SPEC % outdir, "s.toml")
        assert main(["analyze", str(spec), str(snap)]) == EXIT_OK
        _, rows = read_csv(outdir / "serrin_q3.0_rinf_N1.csv")
        got = float(rows[0][2])
        expected = lq_norm(genuine3d_cut(u, 1), 3.0)
        assert abs(got - expected) <= 1e-12 * expected

    def test_grid_mismatch_rejected(self, tmp_path, capsys):
        from torusns import GridSpec, inverse_transform, random_divfree_field, write_snapshot

        a = inverse_transform(random_divfree_field(GridSpec(16, 0.01), 2.0, 1))
        b = inverse_transform(random_divfree_field(GridSpec(8, 0.01), 2.0, 1))
        pa, pb = tmp_path / "a.tnsf", tmp_path / "b.tnsf"
        write_snapshot(pa, a, time=0.0)
        write_snapshot(pb, b, time=0.1)
        spec = write_config(tmp_path, ANALYZE_SPEC % (tmp_path / "m"), "m.toml")
        assert main(["analyze", str(spec), str(pa), str(pb)]) == EXIT_CONFIG
        assert "grid" in capsys.readouterr().err

    def test_corrupt_snapshot_rejected(self, tmp_path, capsys):
        bad = tmp_path / "bad.tnsf"
        bad.write_bytes(b"JUNKJUNKJUNKJUNKJUNKJUNKJUNK")
        spec = write_config(tmp_path, ANALYZE_SPEC % (tmp_path / "c"), "c.toml")
        assert main(["analyze", str(spec), str(bad)]) == EXIT_CONFIG


VERIFY_SPEC = """
[[inequality]]
id = "slab-lq-bound"
q = 4.0
samples = 15
seed = 2
modes = 16
n_list = [1, 2]

[[inequality]]
id = "sobolev-embedding"
dimension = 2
q = 4.0
samples = 15
seed = 3
modes = 16

[output]
directory = "%s"
"""


class TestVerifyCommand:
    def test_small_suite_passes(self, tmp_path):
        outdir = tmp_path / "verify"
        spec = write_config(tmp_path, VERIFY_SPEC % outdir, "v.toml")
        assert main(["verify", str(spec)]) == EXIT_OK
        assert (outdir / "inequality_summary.csv").is_file()
        assert (outdir / "inequality_0_slab-lq-bound.csv").is_file()
        assert (outdir / "figures" / "inequality_ratios.png").is_file()
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert manifest["failures"] == []

    def test_default_suite_passes(self, tmp_path):
        outdir = tmp_path / "default"
        spec = write_config(tmp_path, '[output]\ndirectory = "%s"' % outdir, "d.toml")
        assert main(["verify", str(spec)]) == EXIT_OK

    def test_invalid_exponent_combination_is_config_error(self, tmp_path, capsys):
        text = """
[[inequality]]
id = "slab-lq-bound"
q = 1.5
samples = 5
"""
        spec = write_config(tmp_path, text, "bad.toml")
        assert main(["verify", str(spec)]) == EXIT_CONFIG
        assert "q" in capsys.readouterr().err
