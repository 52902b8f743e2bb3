"""Binary field snapshots.

Layout (little-endian): magic "TNSF", format version u32, M u32,
viscosity f64, time f64, then 3 * M^3 f64 physical velocity samples per
component in x-fastest order.  Snapshots hold physical samples, so a
write/read round trip reproduces the samples bit for bit.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fields import GridSpec, PhysicalField

MAGIC = b"TNSF"
VERSION = 1
_HEADER = struct.Struct("<4sIIdd")


class SnapshotError(ValueError):
    """Malformed snapshot file (bad magic, version, or size)."""


def write_snapshot(path, field: PhysicalField, time: float) -> None:
    grid = field.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, grid.modes_per_dim, grid.viscosity, time))
        for comp in range(3):
            fh.write(np.asarray(field.samples[comp], dtype="<f8").tobytes(order="F"))


def read_snapshot(path, dealias_fraction: float = 2.0 / 3.0) -> tuple[PhysicalField, float]:
    """Read a snapshot; returns (field, time).

    The header does not carry the dealias fraction, so the caller may
    supply one for the reconstructed grid.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header")
    magic, version, m, viscosity, time = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported format version {version}")
    expected = _HEADER.size + 3 * m**3 * 8
    if len(raw) != expected:
        raise SnapshotError(f"{path}: payload size {len(raw)} != expected {expected}")
    grid = GridSpec(modes_per_dim=int(m), viscosity=float(viscosity),
                    dealias_fraction=dealias_fraction)
    samples = np.empty((3, m, m, m))
    offset = _HEADER.size
    block = m**3 * 8
    for comp in range(3):
        flat = np.frombuffer(raw, dtype="<f8", count=m**3, offset=offset)
        samples[comp] = flat.reshape((m, m, m), order="F")
        offset += block
    return PhysicalField(grid, samples), float(time)
