import math
from fractions import Fraction

import numpy as np
import pytest

import gabtor as gt
from gabtor.errors import NotBiorthogonalError, ParameterError

from conftest import random_signal


def rand_l1_elem(theta, rng, r=2):
    c = rng.standard_normal((2 * r + 1, 2 * r + 1)) + 1j * rng.standard_normal((2 * r + 1, 2 * r + 1))
    return gt.AlgebraElement(theta, c)


class TestLeibnizResidual:
    def test_single_shift_position_direction(self, gaussian32, lat_half):
        a = gt.delta_element(lat_half.theta, 1, 1)
        assert gt.leibniz_residual(a, gaussian32, lat_half, 1) <= 1e-10

    def test_zero_element(self, gaussian32, lat_half):
        assert gt.leibniz_residual(gt.zero_element(lat_half.theta), gaussian32, lat_half, 1) == 0.0

    def test_random_l1_derivative_direction(self, gaussian32, lat_half, rng):
        a = rand_l1_elem(lat_half.theta, rng)
        assert gt.leibniz_residual(a, gaussian32, lat_half, 2) <= 1e-8

    def test_many_random_draws(self, gaussian32, grid32, rng):
        # quantified invariant: a sample of random elements and both directions
        for theta in (Fraction(1), Fraction(1, 2), Fraction(3, 4)):
            lat = gt.LatticeSpec(theta, grid32)
            for _ in range(20):
                a = rand_l1_elem(theta, rng, r=int(rng.integers(1, 4)))
                for i in (1, 2):
                    assert gt.leibniz_residual(a, gaussian32, lat, i) <= 1e-8


class TestHermitianResidual:
    def test_gaussian_position_direction(self, gaussian32, lat_half):
        assert gt.hermitian_residual(gaussian32, gaussian32, lat_half, 1, 15) <= 1e-8

    def test_gaussian_derivative_direction(self, gaussian32, lat_half):
        assert gt.hermitian_residual(gaussian32, gaussian32, lat_half, 2, 15) <= 1e-7

    def test_zero_signal(self, gaussian32, grid32, lat_half):
        z = gt.Signal(grid32, np.zeros(grid32.n))
        assert gt.hermitian_residual(z, gaussian32, lat_half, 1, 10) == 0.0


class TestCurvature:
    @pytest.mark.parametrize("theta", [1, Fraction(1, 2)])
    def test_gaussian_residual(self, gaussian32, theta):
        assert gt.curvature_residual(gaussian32, theta) <= 1e-6

    def test_hermite3(self, grid32):
        h3 = gt.make_window("hermite", grid32, 3)
        assert gt.curvature_residual(h3, 1) <= 1e-5

    @pytest.mark.parametrize("theta", [1, Fraction(1, 2), Fraction(3, 4)])
    def test_fitted_constant(self, gaussian32, theta):
        fit = gt.curvature_constant(gaussian32, theta)
        target = -2j * np.pi / float(theta)
        assert abs(fit - target) / abs(target) <= 1e-6

    def test_indicator_large_residual_reported_not_raised(self, chi32):
        assert gt.curvature_residual(chi32, 1) > 0.1


class TestBattleIdentity:
    def test_onb_pair_position_direction(self, chi32, lat_one):
        for k in range(-3, 4):
            for l in range(-3, 4):
                v1, v2 = gt.battle_identity_check(chi32, chi32, lat_one, k, l, mode=1)
                assert abs(v1 - v2) <= 1e-8

    def test_zero_shift_reduces_to_skew_exchange(self, chi32, lat_one):
        v1, v2 = gt.battle_identity_check(chi32, chi32, lat_one, 0, 0, mode=1)
        assert abs(v1 - v2) <= 1e-10
        # both sides equal <nabla_1 chi, chi>, the grid moment of 2 pi i t on [0,1)
        s = chi32.grid.s
        expected = 2j * np.pi * (0.5 - 0.5 / s)
        assert abs(v1 - expected) < 1e-12

    def test_uncertified_pair_rejected(self, chi32, gaussian32, lat_one):
        with pytest.raises(NotBiorthogonalError):
            gt.battle_identity_check(chi32, gaussian32, lat_one, 1, 0, mode=1)

    def test_derivative_direction_flagged_nonconvergent(self):
        table = gt.battle_refinement("indicator", [32, 64, 128], 32, Fraction(1), 2, 1, mode=2)
        assert table.summary["non_convergent"]
        assert "nabla_g" in table.summary["growing_series"]

    def test_position_direction_not_flagged(self):
        table = gt.battle_refinement("indicator", [32, 64, 128], 32, Fraction(1), 2, 1, mode=1)
        assert not table.summary["non_convergent"]


class TestBltSweep:
    def test_small_sweep_monotone(self):
        grid = gt.make_grid(8, 12)
        table = gt.blt_sweep("gaussian", [Fraction(1, 2), Fraction(3, 4)], grid)
        uh = [r.u_h for r in table.rows]
        assert uh[0] < uh[1]
        assert table.summary["u_h_strictly_increasing"]

    def test_critical_row_flagged_sweep_completes(self):
        grid = gt.make_grid(8, 12)
        table = gt.blt_sweep("gaussian", [Fraction(1, 2), Fraction(1)], grid)
        assert [r.status for r in table.rows] == ["ok", "not-a-frame"]
        assert math.isnan(table.rows[1].u_h)
        assert table.summary["flagged_rows"] == 1

    def test_u_g_closed_form(self):
        grid = gt.make_grid(8, 12)
        table = gt.blt_sweep("gaussian", [Fraction(1, 2)], grid)
        assert abs(table.rows[0].u_g - math.pi**2 * 4) < 1e-3

    def test_empty_list_rejected(self, grid32):
        with pytest.raises(ParameterError):
            gt.blt_sweep("gaussian", [], grid32)


class TestGridDivergence:
    def test_indicator_ratios_near_two(self):
        table = gt.grid_divergence_study("indicator", [32, 64, 128], 32)
        for ratio in table.summary["d2_growth_ratios"]:
            assert 1.7 <= ratio <= 2.3

    def test_gaussian_controls_stable(self):
        table = gt.grid_divergence_study("indicator", [32, 64, 128], 32)
        d2 = [r.residuals["ctrl_d2_energy"] for r in table.rows]
        d1 = [r.residuals["ctrl_d1_energy"] for r in table.rows]
        assert max(d2) - min(d2) < 1e-8
        assert max(d1) - min(d1) < 1e-8

    def test_requires_indicator(self):
        with pytest.raises(ParameterError):
            gt.grid_divergence_study("gaussian", [32, 64], 32)

    def test_requires_increasing_s(self):
        with pytest.raises(ParameterError):
            gt.grid_divergence_study("indicator", [64, 32], 32)
