"""Genuine-3D cut, its complement, and the anisotropic slab partition."""

import numpy as np
import pytest

from torusns import (
    GridSpec,
    ModePartition,
    anisotropic_partition,
    field_from_modes,
    genuine3d_cut,
    inner_product,
    init_taylor_green,
    low_cut,
    random_divfree_field,
    stokes_power,
)


class TestGenuine3dCut:
    def test_deep_mode_kept(self, grid16):
        u = field_from_modes(grid16, {(2, 2, 2): (0, 1.0, 0)})
        np.testing.assert_array_equal(genuine3d_cut(u, 1).coeffs, u.coeffs)

    def test_mode_with_zero_component_dropped(self, grid16):
        u = field_from_modes(grid16, {(2, 0, 2): (0, 1.0, 0)})
        for n in (1, 2, 5):
            assert genuine3d_cut(u, n).l2_norm() == 0.0

    def test_taylor_green_has_no_genuine_3d_part(self, grid16):
        u = init_taylor_green(grid16).u
        for n in (1, 2, 3, 7):
            assert genuine3d_cut(u, n).l2_norm() == 0.0

    def test_idempotent(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=41)
        for n in (1, 2, 4):
            once = genuine3d_cut(u, n)
            np.testing.assert_array_equal(genuine3d_cut(once, n).coeffs, once.coeffs)

    def test_commutes_with_stokes_power_exactly(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=42)
        a = stokes_power(genuine3d_cut(u, 2), 0.5)
        b = genuine3d_cut(stokes_power(u, 0.5), 2)
        assert np.array_equal(a.coeffs, b.coeffs)

    def test_norm_monotone_in_cut_level(self, grid16):
        u = random_divfree_field(grid16, 1.2, seed=43)
        norms = [genuine3d_cut(u, n).l2_norm() for n in range(1, 8)]
        assert all(b <= a for a, b in zip(norms, norms[1:]))

    def test_preserves_hermitian_and_divfree(self, grid16):
        from torusns.fields import hermitian_defect

        u = random_divfree_field(grid16, 2.0, seed=44)
        w = genuine3d_cut(u, 2)
        assert hermitian_defect(w.coeffs) == 0.0
        assert w.divergence_max() <= 1e-12 * max(w.l2_norm(), 1e-300)

    def test_rejects_bad_cut_level(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=45)
        with pytest.raises(ValueError, match="cut level"):
            genuine3d_cut(u, 0)


class TestLowCut:
    def test_complementary_masks_reassemble_exactly(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=46)
        for n in (1, 3, 6):
            total = low_cut(u, n).coeffs + genuine3d_cut(u, n).coeffs
            assert np.array_equal(total, u.coeffs)

    def test_bands_are_orthogonal(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=47)
        assert inner_product(low_cut(u, 2), genuine3d_cut(u, 2)) == 0.0

    def test_low_mode_untouched_by_low_cut(self, grid32):
        u = field_from_modes(grid32, {(5, 5, 5): (1.0, 0, -1.0)})
        np.testing.assert_array_equal(low_cut(u, 10).coeffs, u.coeffs)


class TestAnisotropicPartition:
    def test_slab_membership_examples(self, grid16):
        part = ModePartition.for_grid(grid16, 2)
        assert part.label_of((3, 1, 5)) == "V2"
        assert part.label_of((1, 9, 9)) == "V1"
        assert part.label_of((3, 3, 1)) == "V3"
        assert part.label_of((3, 3, 3)) == "W"

    def test_partition_reassembles_low_band(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=48)
        for n in (1, 2, 4):
            v1, v2, v3 = anisotropic_partition(u, n)
            total = v1.coeffs + v2.coeffs + v3.coeffs
            assert np.array_equal(total, low_cut(u, n).coeffs)

    def test_pieces_mutually_orthogonal(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=49)
        v1, v2, v3 = anisotropic_partition(u, 2)
        w = genuine3d_cut(u, 2)
        pieces = (v1, v2, v3, w)
        for i in range(4):
            for j in range(i + 1, 4):
                assert inner_product(pieces[i], pieces[j]) == 0.0

    def test_energy_partition_identity(self, grid16):
        u = random_divfree_field(grid16, 1.7, seed=50)
        for n in (1, 2, 4):
            v1, v2, v3 = anisotropic_partition(u, n)
            w = genuine3d_cut(u, n)
            total = sum(f.l2_norm() ** 2 for f in (v1, v2, v3, w))
            assert abs(total - u.l2_norm() ** 2) <= 1e-12 * u.l2_norm() ** 2

    def test_labels_cover_lattice(self, grid8):
        part = ModePartition.for_grid(grid8, 2)
        labels = part.labels()
        # every cell gets exactly one code; spot-check against label_of
        from torusns.fields import wavenumbers

        k = wavenumbers(8)
        rng = np.random.default_rng(0)
        for _ in range(50):
            i, j, l = rng.integers(0, 8, size=3)
            assert part.label_name(labels[i, j, l]) == part.label_of((k[i], k[j], k[l]))
