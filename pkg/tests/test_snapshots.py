"""Binary snapshot format: round trips, header validation, layout."""

import struct

import numpy as np
import pytest

from torusns import (
    GridSpec,
    forward_transform,
    inverse_transform,
    random_divfree_field,
    read_snapshot,
    write_snapshot,
)
from torusns.snapshots import MAGIC, SnapshotError, VERSION


@pytest.fixture
def sample_field(grid16):
    return inverse_transform(random_divfree_field(grid16, 2.0, seed=131))


class TestRoundTrip:
    def test_samples_bit_identical(self, tmp_path, sample_field):
        path = tmp_path / "field.tnsf"
        write_snapshot(path, sample_field, time=0.25)
        back, t = read_snapshot(path)
        assert t == 0.25
        assert np.array_equal(back.samples, sample_field.samples)
        assert back.grid.modes_per_dim == 16
        assert back.grid.viscosity == sample_field.grid.viscosity

    def test_coefficients_identical_after_retransform(self, tmp_path, sample_field):
        path = tmp_path / "field.tnsf"
        write_snapshot(path, sample_field, time=0.0)
        back, _ = read_snapshot(path)
        a = forward_transform(sample_field)
        b = forward_transform(back)
        assert np.array_equal(a.coeffs, b.coeffs)

    def test_x_fastest_payload_order(self, tmp_path, grid16):
        from torusns import PhysicalField
        from torusns.snapshots import _HEADER

        samples = np.zeros((3, 16, 16, 16))
        samples[0, 1, 0, 0] = 7.0   # x index 1: second payload value
        path = tmp_path / "order.tnsf"
        write_snapshot(path, PhysicalField(grid16, samples), time=0.0)
        raw = path.read_bytes()
        values = np.frombuffer(raw, dtype="<f8", count=4, offset=_HEADER.size)
        assert values[1] == 7.0


class TestHeaderValidation:
    def test_bad_magic(self, tmp_path, sample_field):
        path = tmp_path / "bad.tnsf"
        write_snapshot(path, sample_field, time=0.0)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with pytest.raises(SnapshotError, match="magic"):
            read_snapshot(path)

    def test_bad_version(self, tmp_path, sample_field):
        path = tmp_path / "bad.tnsf"
        write_snapshot(path, sample_field, time=0.0)
        raw = bytearray(path.read_bytes())
        raw[4:8] = struct.pack("<I", VERSION + 9)
        path.write_bytes(bytes(raw))
        with pytest.raises(SnapshotError, match="version"):
            read_snapshot(path)

    def test_truncated_payload(self, tmp_path, sample_field):
        path = tmp_path / "bad.tnsf"
        write_snapshot(path, sample_field, time=0.0)
        raw = path.read_bytes()
        path.write_bytes(raw[:-16])
        with pytest.raises(SnapshotError, match="size"):
            read_snapshot(path)

    def test_header_fields(self, tmp_path, sample_field):
        path = tmp_path / "hdr.tnsf"
        write_snapshot(path, sample_field, time=1.5)
        raw = path.read_bytes()
        magic, version, m, nu, t = struct.unpack_from("<4sIIdd", raw)
        assert magic == MAGIC and version == VERSION
        assert m == 16 and nu == sample_field.grid.viscosity and t == 1.5
