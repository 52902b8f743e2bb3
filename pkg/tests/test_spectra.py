"""Shell spectra, power-law fits, and weighted suprema."""

import math

import numpy as np
import pytest

from torusns import (
    GridSpec,
    ShellSpectrum,
    decay_exponent,
    energy_spectrum,
    field_from_modes,
    genuine3d_cut,
    random_divfree_field,
    sobolev_norm,
    spectral_zeros,
    sup_weighted_spectrum,
    synthetic_power_spectrum,
)


class TestEnergySpectrum:
    def test_single_stored_mode(self, grid16):
        u = field_from_modes(grid16, {(1, 0, 0): (0, 1.0, 0)})
        spec = energy_spectrum(u)
        assert spec.kappa.tolist() == [1.0]
        assert abs(spec.energy[0] - 1.0) <= 1e-15

    def test_hermitian_pair_doubles(self, grid16):
        u = field_from_modes(grid16, {(1, 0, 0): (0, 1.0, 0), (-1, 0, 0): (0, 1.0, 0)})
        spec = energy_spectrum(u)
        assert abs(spec.energy[0] - 2.0) <= 1e-15

    def test_zero_field_empty(self, grid16):
        spec = energy_spectrum(spectral_zeros(grid16))
        assert spec.kappa.size == 0

    def test_sum_identity(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=71)
        total = 4.0 * math.pi**2 * energy_spectrum(u).total()
        y = sobolev_norm(u, 0.5) ** 2
        assert abs(total - y) <= 1e-12 * y

    def test_high_band_shells_start_deep(self, grid16):
        u = random_divfree_field(grid16, 1.5, seed=72)
        for n in (1, 2):
            spec = energy_spectrum(genuine3d_cut(u, n))
            assert np.all(spec.kappa**2 >= 3 * (n + 1) ** 2 - 1e-9)

    def test_unit_binning_preserves_total(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=73)
        exact = energy_spectrum(u, binning="exact")
        unit = energy_spectrum(u, binning="unit")
        assert abs(exact.total() - unit.total()) <= 1e-12 * exact.total()
        assert unit.binning == "unit"


class TestDecayExponent:
    def test_kolmogorov_slope(self):
        spec = synthetic_power_spectrum(400, 5.0 / 3.0)
        assert abs(decay_exponent(spec, (1.0, 20.0)) + 5.0 / 3.0) <= 1e-2

    def test_minus_two_slope(self):
        spec = synthetic_power_spectrum(400, 2.0)
        assert abs(decay_exponent(spec, (1.0, 20.0)) + 2.0) <= 1e-2

    def test_flat_spectrum(self):
        spec = synthetic_power_spectrum(400, 0.0)
        assert abs(decay_exponent(spec, (1.0, 20.0))) <= 1e-10

    def test_too_few_shells(self):
        spec = synthetic_power_spectrum(400, 2.0)
        with pytest.raises(ValueError, match="at least 3"):
            decay_exponent(spec, (1.0, 1.5))


class TestSupWeightedSpectrum:
    def test_exact_cancellation(self):
        spec = synthetic_power_spectrum(200, 3.0)
        assert abs(sup_weighted_spectrum(spec, 3.0) - 1.0) <= 1e-12

    def test_zero_spectrum(self):
        spec = ShellSpectrum(np.array([1.0, 2.0]), np.array([0.0, 0.0]))
        assert sup_weighted_spectrum(spec, 2.5) == 0.0

    def test_single_shell_arithmetic(self):
        spec = ShellSpectrum(np.array([2.0]), np.array([3.0]))
        assert abs(sup_weighted_spectrum(spec, 3.0) - 24.0) <= 1e-12

    def test_growing_weight_attained_at_band_corner(self):
        # E = kappa^-2 on the full lattice: kappa^delta E peaks at the corner
        m, delta = 32, 3.0
        spec = synthetic_power_spectrum(3 * (m // 2) ** 2, 2.0)
        expected = (math.sqrt(3.0) * m / 2.0) ** (delta - 2.0)
        value = sup_weighted_spectrum(spec, delta)
        assert abs(value - expected) <= 0.05 * expected

    def test_rejects_small_delta(self):
        spec = synthetic_power_spectrum(100, 2.0)
        with pytest.raises(ValueError, match="exceed 2"):
            sup_weighted_spectrum(spec, 2.0)


class TestShellSpectrumValidation:
    def test_sorted_on_construction(self):
        spec = ShellSpectrum(np.array([3.0, 1.0]), np.array([9.0, 1.0]))
        assert spec.kappa.tolist() == [1.0, 3.0]
        assert spec.energy.tolist() == [1.0, 9.0]

    def test_rejects_negative_energy(self):
        with pytest.raises(ValueError, match="nonnegative"):
            ShellSpectrum(np.array([1.0]), np.array([-1.0]))
