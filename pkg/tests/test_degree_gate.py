import math

import numpy as np
import pytest

from app.services import lfunc
from app.services.degree_gate import (
    bj_growth,
    bj_values,
    decay_exponent,
    degree_gate_report,
    degree_zero_constraints,
    gamma_family,
    k_decay_profile,
    local_roots,
    q_lower_bound_probe,
    theta_requirement,
)
from app.services.lfunc import GammaFactor, LocalPolynomial, euler_log_coeffs
from app.utils.errors import DomainError, InsufficientDataError


class TestDecayProfile:
    """Tests for K(x) coefficient decay"""

    @pytest.mark.parametrize("d", [0.5, 1.0, 2.0])
    def test_exponent_tracks_degree(self, d):
        """Test the n log n coefficient approximates d - 1"""
        profile = k_decay_profile(gamma_family(d), None, 200)
        assert abs(profile.exponent - (d - 1.0)) <= 0.05

    def test_zeta_poles_excluded(self, zeta):
        """Test Gamma(s/2) poles at even -n are dropped from the fit"""
        profile = k_decay_profile(zeta.gamma, None, 200)
        assert set(profile.excluded) == set(range(0, 201, 2))
        assert abs(profile.exponent) <= 0.05

    def test_f_values_shift_profile(self):
        gamma = gamma_family(1.0)
        plain = k_decay_profile(gamma, None, 40)
        scaled = k_decay_profile(gamma, lambda s: 2.0, 40)
        assert np.allclose(scaled.log_ratio - plain.log_ratio, math.log(2.0))

    def test_too_few_points(self):
        profile = k_decay_profile(gamma_family(1.0), None, 10)
        assert profile.exponent is None
        with pytest.raises(InsufficientDataError):
            decay_exponent(profile)

    def test_rejects_non_positive_degree(self):
        with pytest.raises(DomainError):
            gamma_family(0.0)


class TestLocalRoots:
    """Tests for inverse roots of local polynomials"""

    def test_linear(self):
        factor = local_roots([1.0, -2.0], p=2)
        assert np.allclose(factor.roots, [2.0])

    def test_two_real_roots(self):
        factor = local_roots([1.0, -3.0, 2.0])
        assert sorted(abs(r) for r in factor.roots) == pytest.approx([1.0, 2.0])
        assert factor.dominant

    def test_unit_circle_pair(self):
        factor = local_roots([1.0, -1.0, 1.0])
        assert np.allclose(np.abs(factor.roots), 1.0)
        assert not factor.dominant

    @pytest.mark.parametrize("seed", range(5))
    def test_round_trip(self, seed):
        """Test reconstruction for random polynomials with |R| in [0.5, 3]"""
        rng = np.random.default_rng(seed)
        r = int(rng.integers(1, 7))
        R = rng.uniform(0.5, 3.0, r) * np.exp(2j * np.pi * rng.uniform(size=r))
        coeffs = np.poly(R)
        factor = local_roots(coeffs)
        assert np.max(np.abs(np.poly(np.array(factor.roots)) - coeffs)) <= 1e-9 * np.max(np.abs(coeffs))

    def test_trailing_zeros_dropped(self):
        assert len(local_roots([1.0, -2.0, 0.0]).roots) == 1

    def test_rejects_constant(self):
        with pytest.raises(DomainError):
            local_roots([1.0])

    def test_rejects_non_unit_constant(self):
        with pytest.raises(DomainError):
            local_roots([2.0, 1.0])


class TestBjGrowth:
    """Tests for |B_j|^(1/j) and the theta it forces"""

    def test_single_root(self):
        growth = bj_growth(local_roots([1.0, -2.0], p=2), 500)
        assert abs(growth.limsup - 2.0) <= 0.02
        assert growth.values[-1] == pytest.approx((2.0 ** 500 / 500) ** (1 / 500), rel=1e-12)

    def test_unit_root(self):
        growth = bj_growth(local_roots([1.0, -1.0]), 500)
        assert abs(growth.limsup - 1.0) <= 0.02

    def test_equioscillation(self):
        """Test R = exp(+-i) gives B_j = -2 cos(j) / j"""
        factor = local_roots([1.0, -2.0 * math.cos(1.0), 1.0])
        j = np.arange(1, 21)
        assert np.allclose(bj_values(factor, 20), -2.0 * np.cos(j) / j)
        assert abs(bj_growth(factor, 500).limsup - 1.0) <= 0.02

    def test_rejects_empty_range(self):
        with pytest.raises(DomainError):
            bj_growth(local_roots([1.0, -2.0]), 0)

    def test_euler_log_agrees_with_roots(self, delta):
        """Test log F_p from the recurrence against -B_j from the roots"""
        lp = delta.source.local_factor(2)
        factor = local_roots(lp.coeffs, 2)
        assert np.allclose(euler_log_coeffs(delta, 2, 10), -bj_values(factor, 10), atol=1e-10)

    @pytest.mark.parametrize("seed", range(4))
    def test_euler_log_is_minus_bj_for_random_factors(self, seed):
        """Test log F_p = -log P_p term by term, from the factor and from a_(p^k)"""
        rng = np.random.default_rng(100 + seed)
        r = int(rng.integers(1, 4))
        R = rng.uniform(0.3, 1.5, r) * np.exp(2j * np.pi * rng.uniform(size=r))
        coeffs = tuple(np.poly(R))
        expected = -bj_values(local_roots(coeffs, 2), 12)
        F = lfunc.from_euler("random", [LocalPolynomial(2, coeffs)], 4096)
        assert np.allclose(euler_log_coeffs(F, 2, 12), expected, rtol=1e-8, atol=1e-10)
        realized = lfunc.from_coefficients("realized", F.coefficients)
        assert np.allclose(euler_log_coeffs(realized, 2, 12), expected, rtol=1e-8, atol=1e-10)

    def test_theta_inadmissible(self):
        verdict = theta_requirement(local_roots([1.0, -2.0], p=2))
        assert verdict.theta == pytest.approx(1.0)
        assert not verdict.admissible

    def test_theta_zeta(self):
        verdict = theta_requirement(local_roots([1.0, -1.0], p=3))
        assert abs(verdict.theta) < 1e-12 and verdict.admissible

    def test_theta_on_the_half_line_is_inadmissible(self):
        """Test roots of modulus sqrt(p) are rejected even when log rounds below 1/2"""
        factor = local_roots([1.0, -2.6, 2.0], p=2)
        assert factor.max_modulus == pytest.approx(math.sqrt(2.0))
        verdict = theta_requirement(factor)
        assert verdict.theta == pytest.approx(0.5)
        assert not verdict.admissible
        assert not theta_requirement(local_roots([1.0, 0.0, 2.0], p=2)).admissible

    def test_theta_just_inside_is_admissible(self):
        verdict = theta_requirement(local_roots([1.0, 0.0, 1.9], p=2))
        assert verdict.theta < 0.5 and verdict.admissible

    def test_theta_needs_prime(self):
        with pytest.raises(DomainError):
            theta_requirement(local_roots([1.0, -2.0]))


class TestDegreeZero:
    """Tests for degree-0 candidates"""

    def test_one_is_admissible(self):
        report = degree_zero_constraints(1.0, {1: 1.0})
        assert report.consistent and report.admissible

    def test_matching_solution_fails_theta(self):
        """Test Q^2 = 4 with a_4 = Q forces |R| >= sqrt(2) at p = 2"""
        report = degree_zero_constraints(2.0, {1: 1.0, 2: 3.0, 4: 2.0})
        assert report.consistent
        assert report.epsilon == pytest.approx(1.0)
        assert [v.p for v in report.verdicts] == [2]
        assert report.verdicts[0].theta == pytest.approx(1.0)
        assert not report.admissible

    @pytest.mark.parametrize("c", [-2.6, -1.0, 0.0, 0.5, 2.7])
    @pytest.mark.parametrize("epsilon", [1.0, -1.0])
    def test_complex_pair_on_the_boundary_fails_theta(self, c, epsilon):
        """Test Q^2 = 4 with a conjugate-type root pair of modulus sqrt(2) is inadmissible"""
        a2 = c if epsilon > 0 else 1j * c
        report = degree_zero_constraints(2.0, {1: 1.0, 2: a2, 4: 2.0 * epsilon})
        assert report.consistent
        assert report.epsilon == pytest.approx(epsilon)
        assert report.verdicts[0].theta == pytest.approx(0.5)
        assert not report.admissible

    def test_support_must_divide(self):
        report = degree_zero_constraints(2.0, {1: 1.0, 3: 0.2, 4: 2.0})
        assert report.support_violations == [3]
        assert not report.consistent

    def test_non_integral_q_squared(self):
        report = degree_zero_constraints(1.5, {1: 1.0})
        assert not report.q_squared_integral

    def test_leading_modulus(self):
        report = degree_zero_constraints(2.0, {1: 1.0, 4: 1.0})
        assert not report.leading_modulus_ok


class TestQBound:
    """Tests for the degree-1 conductor diagnostic"""

    def test_zeta_boundary(self, zeta):
        assert q_lower_bound_probe(zeta.gamma).status == "boundary"

    def test_below(self):
        assert q_lower_bound_probe(GammaFactor(1.0, 0.5, ((0.5, 0.0),))).status == "below"

    def test_dirichlet_above(self, chi3):
        assert q_lower_bound_probe(lfunc.dirichlet_l(chi3, 10).gamma).status == "above"

    def test_rejects_degree_two(self, delta):
        with pytest.raises(DomainError):
            q_lower_bound_probe(delta.gamma)


class TestDegreeGateReport:
    """Tests for the aggregate report"""

    def test_zeta(self, zeta):
        report = degree_gate_report(zeta, prime_limit=30)
        assert report.theta_admissible
        assert [v.p for v in report.verdicts] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        assert report.q_bound.status == "boundary"
        assert sorted(report.growth) == [v.p for v in report.verdicts]
        assert all(g.limsup == pytest.approx(1.0, abs=0.05) for g in report.growth.values())

    def test_counterexample(self):
        report = degree_gate_report(lfunc.counterexample(1000), prime_limit=10)
        assert not report.theta_admissible
        assert report.verdicts[0].p == 2 and report.verdicts[0].theta == pytest.approx(1.0)
        assert abs(report.growth[2].limsup - 2.0) <= 0.05
        rows = report.growth_rows()
        assert rows[0][:2] == (2, 1) and len(rows) == 100 * len(report.verdicts)

    def test_delta(self, delta):
        report = degree_gate_report(delta, prime_limit=20)
        assert report.theta_admissible
        assert abs(report.decay.exponent - 1.0) <= 0.05
        assert report.q_bound is None

    def test_explicit_coefficients_without_local_data(self):
        """Test primes with too few realized powers are reported unverifiable"""
        F = lfunc.from_coefficients("list", [1.0] * 30)
        report = degree_gate_report(F, prime_limit=7)
        assert report.unverifiable == [5, 7]
        assert report.decay is None
