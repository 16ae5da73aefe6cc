import math
from fractions import Fraction

import numpy as np
import pytest

import gabtor as gt
from gabtor.algebra import represent_dense
from gabtor.errors import NotTightError, ParameterError

from conftest import random_signal
from oracles import brute_involution, brute_twisted_product


def rand_elem(theta, rng, r=2):
    c = rng.standard_normal((2 * r + 1, 2 * r + 1)) + 1j * rng.standard_normal((2 * r + 1, 2 * r + 1))
    return gt.AlgebraElement(theta, c)


@pytest.fixture(scope="module")
def small_lat():
    # q = 3 divides s = 6; P = 4 keeps the dense representation cheap (n = 24)
    grid = gt.make_grid(6, 4)
    return gt.LatticeSpec(Fraction(1, 3), grid)


class TestTwistedProduct:
    def test_unit(self, rng):
        a = rand_elem(Fraction(1, 3), rng)
        out = gt.twisted_product(gt.delta_element(Fraction(1, 3)), a)
        np.testing.assert_array_equal(out.coeffs, a.coeffs)

    def test_generator_commutation_phase(self):
        # composing the two generators in either order differs by exp(2 pi i theta)
        th = Fraction(1, 3)
        t_then_m = gt.twisted_product(gt.delta_element(th, 0, 1), gt.delta_element(th, 1, 0))
        m_then_t = gt.twisted_product(gt.delta_element(th, 1, 0), gt.delta_element(th, 0, 1))
        assert abs(t_then_m.coeff(1, 1) - np.exp(2j * np.pi / 3) * m_then_t.coeff(1, 1)) < 1e-15
        assert abs(m_then_t.coeff(1, 1) - np.exp(-2j * np.pi / 3)) < 1e-15

    def test_matches_bruteforce(self, rng):
        for theta in (Fraction(1, 3), Fraction(2, 5), Fraction(1)):
            a, b = rand_elem(theta, rng), rand_elem(theta, rng)
            expected = brute_twisted_product(a.coeffs, b.coeffs, theta)
            got = gt.twisted_product(a, b)
            np.testing.assert_allclose(got.coeffs, expected, atol=1e-12)

    def test_associativity(self, rng):
        th = Fraction(2, 7)
        for _ in range(10):
            a, b, c = (rand_elem(th, rng) for _ in range(3))
            lhs = gt.twisted_product(gt.twisted_product(a, b), c)
            rhs = gt.twisted_product(a, gt.twisted_product(b, c))
            assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-12

    def test_theta_mismatch(self, rng):
        with pytest.raises(ParameterError):
            gt.twisted_product(rand_elem(Fraction(1, 3), rng), rand_elem(Fraction(1, 2), rng))

    def test_theta1_commutativity_bitwise(self, rng):
        for _ in range(20):
            a, b = rand_elem(Fraction(1), rng), rand_elem(Fraction(1), rng)
            ab = gt.twisted_product(a, b)
            ba = gt.twisted_product(b, a)
            np.testing.assert_array_equal(ab.coeffs, ba.coeffs)


class TestInvolution:
    def test_delta_fixed(self):
        d = gt.delta_element(Fraction(1, 3))
        np.testing.assert_array_equal(gt.involution(d).coeffs, d.coeffs)

    def test_involution_squares_to_identity(self, rng):
        a = rand_elem(Fraction(2, 5), rng)
        np.testing.assert_allclose(gt.involution(gt.involution(a)).coeffs, a.coeffs, atol=1e-14)

    def test_matches_bruteforce(self, rng):
        a = rand_elem(Fraction(2, 5), rng)
        np.testing.assert_allclose(
            gt.involution(a).coeffs, brute_involution(a.coeffs, Fraction(2, 5)), atol=1e-14
        )

    def test_antimultiplicative(self, rng):
        th = Fraction(1, 3)
        a, b = rand_elem(th, rng), rand_elem(th, rng)
        lhs = gt.involution(gt.twisted_product(a, b))
        rhs = gt.twisted_product(gt.involution(b), gt.involution(a))
        assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-12

    def test_represents_adjoint(self, small_lat, rng):
        a = rand_elem(small_lat.theta, rng, r=1)
        M = represent_dense(a, small_lat)
        Mstar = represent_dense(gt.involution(a), small_lat)
        assert np.max(np.abs(Mstar - M.conj().T)) < 1e-10


class TestAct:
    def test_unit_acts_trivially(self, small_lat, rng):
        g = random_signal(small_lat.grid, rng)
        out = gt.act(gt.delta_element(small_lat.theta), g, small_lat)
        np.testing.assert_allclose(out.values, g.values, atol=1e-15)

    def test_delta_acts_as_shift(self, small_lat, rng):
        g = random_signal(small_lat.grid, rng)
        out = gt.act(gt.delta_element(small_lat.theta, 2, -1), g, small_lat)
        np.testing.assert_allclose(out.values, gt.tf_shift(g, 2, -1, small_lat).values, atol=1e-14)

    def test_module_axiom(self, small_lat, rng):
        # (a * b) . g = a . (b . g)
        for _ in range(10):
            a, b = rand_elem(small_lat.theta, rng, 1), rand_elem(small_lat.theta, rng, 1)
            g = random_signal(small_lat.grid, rng)
            lhs = gt.act(gt.twisted_product(a, b), g, small_lat)
            rhs = gt.act(a, gt.act(b, g, small_lat), small_lat)
            assert np.max(np.abs(lhs.values - rhs.values)) < 1e-10 * max(1.0, np.max(np.abs(lhs.values)))

    def test_representation_faithful(self, small_lat, rng):
        # pi(a * b) f = pi(a) pi(b) f
        for _ in range(10):
            a, b = rand_elem(small_lat.theta, rng, 1), rand_elem(small_lat.theta, rng, 1)
            f = random_signal(small_lat.grid, rng)
            lhs = gt.act(gt.twisted_product(a, b), f, small_lat).values
            rhs = gt.act(a, gt.act(b, f, small_lat), small_lat).values
            scale = max(np.max(np.abs(lhs)), 1.0)
            assert np.max(np.abs(lhs - rhs)) < 1e-10 * scale

    def test_theta_mismatch(self, small_lat, rng):
        with pytest.raises(ParameterError):
            gt.act(rand_elem(Fraction(1, 2), rng), random_signal(small_lat.grid, rng), small_lat)


class TestModuleIP:
    def test_center_is_inner_product(self, gaussian32, chi32, lat_half):
        m = gt.module_ip(gaussian32, chi32, lat_half, 3)
        assert abs(gt.trace(m) - gt.inner(gaussian32, chi32)) < 1e-14

    def test_matches_analysis_block(self, gaussian32, lat_half, rng):
        # cross-module consistency: module coefficients at (k, l) equal the
        # frame-engine analysis coefficients of the same lattice point
        f = random_signal(gaussian32.grid, rng)
        R = 3
        m = gt.module_ip(f, gaussian32, lat_half, R)
        c = gt.analysis(f, gaussian32, lat_half)
        K = lat_half.time_shift_count()
        s = lat_half.frequency_shift_count
        for k in range(-R, R + 1):
            for l in range(-R, R + 1):
                assert abs(m.coeff(k, l) - c.values[k % K, l % s]) < 1e-12

    def test_action_matches_synthesis(self, gaussian32, lat_half, rng):
        # (<f, g-module>) . u  ==  synthesis(analysis-restricted coefficients, u)
        f = random_signal(gaussian32.grid, rng)
        u = gt.make_window("hermite", gaussian32.grid, 2)
        R = 2
        m = gt.module_ip(f, gaussian32, lat_half, R)
        acted = gt.act(m, u, lat_half)
        direct = np.zeros(gaussian32.grid.n, dtype=complex)
        for k in range(-R, R + 1):
            for l in range(-R, R + 1):
                direct += m.coeff(k, l) * gt.tf_shift(u, k, l, lat_half).values
        np.testing.assert_allclose(acted.values, direct, atol=1e-12)

    def test_gaussian_coefficients_decay(self, gaussian32, lat_half):
        m = gt.module_ip(gaussian32, gaussian32, lat_half, 14)
        mags = np.abs(m.coeffs)
        k = m.k_indices()[:, None] * np.ones_like(mags)
        l = np.ones_like(mags) * m.l_indices()[None, :]
        far = (np.abs(k) >= 12) | (np.abs(l) >= 12)
        assert mags[far].max() < 1e-12

    def test_radius_beyond_period(self, gaussian32, lat_half):
        with pytest.raises(ParameterError):
            gt.module_ip(gaussian32, gaussian32, lat_half, 32)


class TestDerivation:
    def test_annihilates_zero_row(self):
        d = gt.derivation(gt.delta_element(Fraction(1, 3), 0, 2), 1)
        assert d.l1_norm == 0.0

    def test_scales_delta(self):
        d = gt.derivation(gt.delta_element(Fraction(1, 3), 2, 1), 1)
        assert abs(d.coeff(2, 1) - 4j * np.pi) < 1e-15

    def test_leibniz_on_algebra(self, rng):
        th = Fraction(1, 3)
        for i in (1, 2):
            a, b = rand_elem(th, rng), rand_elem(th, rng)
            lhs = gt.derivation(gt.twisted_product(a, b), i)
            rhs = gt.twisted_product(gt.derivation(a, i), b) + gt.twisted_product(a, gt.derivation(b, i))
            assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-12

    def test_derivations_commute_exactly(self, rng):
        a = rand_elem(Fraction(1, 3), rng)
        d12 = gt.derivation(gt.derivation(a, 1), 2)
        d21 = gt.derivation(gt.derivation(a, 2), 1)
        np.testing.assert_array_equal(d12.coeffs, d21.coeffs)

    def test_trace_of_derivation_vanishes(self, rng):
        a = rand_elem(Fraction(1, 3), rng)
        assert gt.trace(gt.derivation(a, 1)) == 0.0
        assert gt.trace(gt.derivation(a, 2)) == 0.0


class TestTrace:
    def test_unit(self):
        assert gt.trace(gt.delta_element(Fraction(1, 3))) == 1.0

    def test_tracial(self, rng):
        th = Fraction(2, 5)
        for _ in range(10):
            a, b = rand_elem(th, rng), rand_elem(th, rng)
            assert abs(gt.trace(gt.twisted_product(a, b)) - gt.trace(gt.twisted_product(b, a))) < 1e-12


class TestProjection:
    def test_onb_projection_is_unit(self, chi32, lat_one):
        p = gt.projection_from_tight(chi32, lat_one, 5)
        d = p.coeffs.copy()
        d[p.rk, p.rl] -= 1.0
        assert np.max(np.abs(d)) < 1e-10

    def test_tight_gaussian_idempotent(self, tight_gauss_half, lat_half):
        p = gt.projection_from_tight(tight_gauss_half, lat_half, 20)
        assert (gt.twisted_product(p, p) - p).l1_norm <= 1e-6

    def test_tight_gaussian_self_adjoint(self, tight_gauss_half, lat_half):
        p = gt.projection_from_tight(tight_gauss_half, lat_half, 20)
        assert (gt.involution(p) - p).l1_norm <= 1e-10

    def test_trace_equals_theta(self, tight_gauss_half, lat_half):
        p = gt.projection_from_tight(tight_gauss_half, lat_half, 20)
        assert abs(gt.trace(p) - 0.5) <= 1e-8

    def test_rejects_non_tight(self, gaussian32, lat_half):
        with pytest.raises(NotTightError) as e:
            gt.projection_from_tight(gaussian32, lat_half, 10)
        assert e.value.upper > e.value.lower


class TestDecayProfile:
    def test_delta(self):
        p = gt.decay_profile(gt.delta_element(Fraction(1, 2)), 4)
        assert p.shell_sups == (1.0,) * 5
        assert p.l1_norm == 1.0

    def test_gaussian_module_ip_is_schwartz_like(self, gaussian32, lat_half):
        m = gt.module_ip(gaussian32, gaussian32, lat_half, 20)
        prof = gt.decay_profile(m, 8)
        assert prof.schwartz_like

    def test_indicator_module_ip_is_not_schwartz_like(self):
        # 1/|l| coefficient tails: use a grid wide enough to see them un-aliased
        grid = gt.make_grid(64, 32)
        lat = gt.LatticeSpec(Fraction(1, 2), grid)
        chi = gt.make_window("indicator", grid)
        m = gt.module_ip(chi, chi, lat, 20)
        prof = gt.decay_profile(m, 8)
        assert not prof.schwartz_like
        # jump decay really is ~1/l on the frequency axis
        mags = np.abs(m.coeffs[m.rk])  # k = 0 row
        assert mags[m.rl + 16] > 1e-3
