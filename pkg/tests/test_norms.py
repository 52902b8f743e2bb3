"""L^q quadrature, Sobolev multipliers, and the space-time accumulator."""

import math

import numpy as np
import pytest

from torusns import (
    SerrinAccumulator,
    field_from_modes,
    gradient,
    inverse_transform,
    lq_norm,
    random_divfree_field,
    serrin_accumulate,
    scaling_class,
    sobolev_norm,
    spectral_zeros,
)


def cosine_field(grid):
    return field_from_modes(grid, {(1, 0, 0): (0.5, 0, 0), (-1, 0, 0): (0.5, 0, 0)})


class TestLqNorm:
    def test_cosine_l2_closed_form(self, grid16):
        assert abs(lq_norm(cosine_field(grid16), 2.0) - 1.0 / math.sqrt(2)) <= 1e-13

    def test_zero_field(self, grid16):
        for q in (2.0, 3.0, 4.0, math.inf):
            assert lq_norm(spectral_zeros(grid16), q) == 0.0

    def test_sup_norm_of_cosine(self, grid16):
        assert abs(lq_norm(cosine_field(grid16), math.inf) - 1.0) <= 1e-13

    def test_quartic_closed_form(self, grid16):
        # mean of cos^4 over a period is 3/8
        expected = (3.0 / 8.0) ** 0.25
        assert abs(lq_norm(cosine_field(grid16), 4.0) - expected) <= 1e-13

    def test_parseval_cross_check(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=61)
        spectral = math.sqrt(float(np.sum(np.abs(u.coeffs) ** 2)))
        assert abs(lq_norm(u, 2.0) - spectral) <= 1e-12 * spectral

    def test_monotone_in_q(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=62)
        values = [lq_norm(u, q) for q in (1.5, 2.0, 3.0, 4.0, 6.0, math.inf)]
        for a, b in zip(values, values[1:]):
            assert a <= b + 1e-12 * max(1.0, b)

    def test_physical_input_agrees(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=63)
        p = inverse_transform(u)
        # q = 2 is exact on the native grid as well
        assert abs(lq_norm(p, 2.0) - lq_norm(u, 2.0)) <= 1e-12 * lq_norm(u, 2.0)

    def test_gradient_tensor_accepted(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=64)
        g = gradient(u)
        assert abs(lq_norm(g, 2.0) - sobolev_norm(u, 0.5)) <= 1e-12 * sobolev_norm(u, 0.5)

    def test_rejects_q_at_or_below_one(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=65)
        with pytest.raises(ValueError, match="q > 1"):
            lq_norm(u, 1.0)
        with pytest.raises(ValueError, match="q > 1"):
            lq_norm(u, 0.5)


class TestSobolevNorm:
    def test_zero_order_is_l2(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=66)
        assert abs(sobolev_norm(u, 0.0) - u.l2_norm()) <= 1e-13 * u.l2_norm()

    def test_single_mode_half_order(self, grid16):
        u = field_from_modes(grid16, {(1, 0, 0): (0, 1.0, 0)})
        assert abs(sobolev_norm(u, 0.5) - 2.0 * math.pi) <= 1e-13

    def test_matches_gradient_parseval(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=67)
        g = gradient(u)
        grad_norm = math.sqrt(float(np.sum(np.abs(g.coeffs) ** 2)))
        assert abs(sobolev_norm(u, 0.5) - grad_norm) <= 1e-12 * grad_norm

    def test_rejects_out_of_range_order(self, grid16):
        u = random_divfree_field(grid16, 2.0, seed=68)
        with pytest.raises(ValueError, match="order"):
            sobolev_norm(u, 1.2)


class TestScalingClass:
    def test_velocity_scaling(self):
        assert scaling_class(3.0, math.inf) == "velocity"
        assert scaling_class(9.0, 3.0) == "velocity"

    def test_gradient_scaling(self):
        assert scaling_class(3.0, 2.0) == "gradient"
        assert scaling_class(1.5, math.inf) == "gradient"

    def test_unclassified(self):
        assert scaling_class(2.0, 2.0) is None


class TestSerrinAccumulator:
    def test_constant_series_finite_r(self):
        acc = SerrinAccumulator(q=3.0, r=2.0)
        for t in np.linspace(0.0, 1.0, 41):
            acc = serrin_accumulate(acc, float(t), 0.7)
        assert abs(acc.finalized() - 0.7) <= 1e-12

    def test_sup_norm(self):
        acc = SerrinAccumulator(q=3.0, r=math.inf)
        for t, v in [(0.0, 1.0), (0.5, 3.0), (1.0, 2.0)]:
            acc = serrin_accumulate(acc, t, v)
        assert acc.finalized() == 3.0

    def test_linear_series_closed_form(self):
        # integral of t^2 over [0,1] is 1/3; trapezoid error is O(dt^2)
        dt = 1.0 / 200
        acc = SerrinAccumulator(q=3.0, r=2.0)
        for i in range(201):
            t = i * dt
            acc = serrin_accumulate(acc, t, t)
        assert abs(acc.finalized() - 1.0 / math.sqrt(3.0)) <= 1e-4

    def test_second_order_convergence(self):
        # smooth integrand t -> t^2, r = 2: halving dt quarters the error
        def error(steps):
            acc = SerrinAccumulator(q=3.0, r=2.0)
            for i in range(steps + 1):
                t = i / steps
                acc = serrin_accumulate(acc, t, t * t)
            return abs(acc.finalized() ** 2 - 0.2)

        ratio = error(50) / error(100)
        assert 3.5 <= ratio <= 4.5

    def test_rejects_non_monotone_time(self):
        acc = SerrinAccumulator(q=3.0, r=2.0)
        acc = serrin_accumulate(acc, 0.5, 1.0)
        with pytest.raises(ValueError, match="strictly increase"):
            serrin_accumulate(acc, 0.5, 1.0)

    def test_records_scaling_flag(self):
        assert SerrinAccumulator(q=3.0, r=math.inf).scaling == "velocity"
        assert SerrinAccumulator(q=3.0, r=2.0).scaling == "gradient"
        assert SerrinAccumulator(q=5.0, r=7.0).scaling is None

    def test_rejects_bad_exponents(self):
        with pytest.raises(ValueError, match="q"):
            SerrinAccumulator(q=1.0, r=2.0)
        with pytest.raises(ValueError, match="r"):
            SerrinAccumulator(q=3.0, r=0.5)
