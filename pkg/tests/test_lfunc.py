import cmath
import dataclasses
import math

import numpy as np
import pytest

from app.services import lfunc
from app.services.characters import character
from app.services.primes import divisor_counts
from app.services.lfunc import (
    GammaFactor,
    LocalPolynomial,
    axiom_audit,
    conductor,
    dirichlet_eval,
    euler_log_coeffs,
    fe_residual,
    fe_residual_report,
    from_coefficients,
    from_euler,
    gamma_from_sstar,
    local_factor_from_coefficients,
    multiplicativity_check,
    normalize_to_sstar,
    product,
    trivial_zeros,
    twist,
)
from app.services.specfun import default_accuracy
from app.utils.errors import (
    CannotCertifyError,
    DomainError,
    NonPrimitiveCharacterError,
    ReconstructionError,
    UnknownBuiltinError,
    UnsupportedWeightError,
)

CATALAN = 0.915965594177219015


class TestGammaFactor:
    """Tests for gamma data and the S* normal form"""

    def test_rejects_non_unit_epsilon(self):
        with pytest.raises(DomainError):
            GammaFactor(1.1, 1.0, ((0.5, 0.0),))

    def test_rejects_non_positive_q(self):
        with pytest.raises(DomainError):
            GammaFactor(1.0, 0.0, ((0.5, 0.0),))

    def test_rejects_negative_shift(self):
        with pytest.raises(DomainError):
            GammaFactor(1.0, 1.0, ((0.5, -0.3),))

    def test_zeta_conductor(self, zeta):
        sstar = normalize_to_sstar(zeta.gamma)
        assert sstar.d == 1
        assert conductor(sstar) == pytest.approx(1.0, abs=1e-12)

    def test_delta_degree_and_conductor(self, delta):
        """Test Gamma(s + 11/2) splits into two half-weight factors with q = 1"""
        sstar = normalize_to_sstar(delta.gamma)
        assert delta.degree == 2.0
        assert sstar.d == 2
        assert np.allclose(sstar.mus, [2.75, 3.25])
        assert conductor(sstar) == pytest.approx(1.0, abs=1e-12)
        assert abs(sstar.eps_squared - 1.0) < 1e-12

    def test_dirichlet_conductor(self, chi3):
        F = lfunc.dirichlet_l(chi3, 100)
        assert conductor(normalize_to_sstar(F.gamma)) == pytest.approx(3.0, rel=1e-12)

    def test_sstar_round_trip(self, delta):
        back = gamma_from_sstar(normalize_to_sstar(delta.gamma))
        assert lfunc.degree(back) == delta.degree
        assert conductor(normalize_to_sstar(back)) == pytest.approx(1.0, abs=1e-12)

    def test_unsupported_weight(self):
        with pytest.raises(UnsupportedWeightError):
            normalize_to_sstar(GammaFactor(1.0, 1.0, ((0.3, 0.0),)))


class TestBuiltins:
    """Tests for builtin candidates"""

    def test_zeta_coefficients(self, zeta):
        assert np.all(zeta.coefficients == 1)
        assert zeta.pole_order == 1

    def test_coefficients_read_only(self, zeta):
        with pytest.raises(ValueError):
            zeta.coefficients[0] = 2.0

    def test_dirichlet_rejects_imprimitive(self, chi3):
        with pytest.raises(NonPrimitiveCharacterError):
            lfunc.dirichlet_l(chi3.lift(6), 100)

    def test_unknown_builtin(self):
        with pytest.raises(UnknownBuiltinError):
            lfunc.builtin("eta")

    def test_list_builtins(self):
        names = {entry["name"] for entry in lfunc.list_builtins()}
        assert names == {"zeta", "dirichlet", "delta", "counterexample"}

    def test_counterexample_coefficients(self):
        F = lfunc.counterexample(16)
        assert np.allclose(F.coefficients[:8], [1, -2, 1, 0, 1, -2, 1, 0])


class TestDirichletSeries:
    """Tests for evaluation where the series converges absolutely"""

    def test_zeta_two(self, zeta):
        value = dirichlet_eval(zeta, 2.0, default_accuracy(1e-6))
        assert abs(value.value - math.pi ** 2 / 6) <= 1e-6
        assert value.bound <= 1e-6

    def test_catalan(self, chi4):
        F = lfunc.dirichlet_l(chi4, 100)
        value = dirichlet_eval(F, 2.0, default_accuracy(1e-6))
        assert abs(value.value - CATALAN) <= 1e-6

    def test_zeta_two_default_accuracy(self, zeta):
        """Test the periodic tail certifies zeta(2) at the default tolerance"""
        value = dirichlet_eval(zeta, 2.0)
        assert abs(value.value - math.pi ** 2 / 6) <= 1e-12
        assert value.bound <= 1e-12

    def test_catalan_default_accuracy(self, chi4):
        value = dirichlet_eval(lfunc.dirichlet_l(chi4, 100), 2.0)
        assert abs(value.value - CATALAN) <= 1e-12

    def test_counterexample_closed_form(self):
        """Test (1 - 2^(1-s))(1 - 2^-s) zeta(s) at s = 2 is pi^2 / 16"""
        value = dirichlet_eval(lfunc.counterexample(100), 2.0)
        assert abs(value.value - math.pi ** 2 / 16) <= 1e-12

    def test_zeta_off_the_real_axis(self, zeta):
        """Test zeta(s) against the alternating eta series at s = 3 + 4i"""
        s = complex(3.0, 4.0)
        n = np.arange(1, 200_001)
        eta = np.sum((-1.0) ** (n + 1) * np.exp(-s * np.log(n)))
        value = dirichlet_eval(zeta, s).value
        assert abs(value * (1 - 2 ** (1 - s)) - eta) <= 1e-10

    def test_twist_inherits_period(self, zeta, chi3):
        F = twist(zeta, chi3)
        assert F.source.period == 3
        assert F.source.period == lfunc.dirichlet_l(chi3, 10).source.period

    def test_completed_zeta_two(self, zeta):
        """Test Phi(2) = pi^-1 Gamma(1) zeta(2) at the default tolerance"""
        assert lfunc.completed_phi(zeta, 2.0) == pytest.approx(math.pi / 6, rel=1e-11)

    def test_completed_refuses_uncertifiable_tail(self):
        with pytest.raises(CannotCertifyError):
            lfunc.completed_phi(lfunc.delta(100), 2.0)

    def test_rejects_near_critical_strip(self, zeta):
        with pytest.raises(DomainError):
            dirichlet_eval(zeta, 1.2)

    def test_dirichlet_polynomial_is_exact(self):
        F = from_coefficients("poly", [1.0, 0.5])
        assert dirichlet_eval(F, 2.0).value == pytest.approx(1.0 + 0.5 / 4.0)

    def test_completed_needs_gamma(self):
        with pytest.raises(CannotCertifyError):
            lfunc.completed_phi(from_coefficients("poly", [1.0]), 2.0)


@pytest.mark.slow
class TestFunctionalEquation:
    """Tests for the inverse-Mellin functional equation residual"""

    @pytest.mark.parametrize("x", [0.7, 1.0, 1.4])
    def test_zeta(self, zeta, x):
        assert abs(fe_residual(zeta, x)) <= 1e-8

    @pytest.mark.parametrize("x", [0.7, 1.0, 1.4])
    def test_dirichlet(self, chi3, chi4, x):
        for chi in (chi3, chi4):
            assert abs(fe_residual(lfunc.dirichlet_l(chi, 1000), x)) <= 1e-8

    def test_rotated_epsilon_breaks_identity(self, chi4):
        F = lfunc.dirichlet_l(chi4, 1000)
        wrong = dataclasses.replace(F, gamma=F.gamma.rotated(cmath.exp(0.1j)))
        assert abs(fe_residual(wrong, 0.7)) > 1e-3

    def test_report_carries_parts(self, zeta):
        report = fe_residual_report(zeta, 1.0)
        assert report.residues != 0
        assert report.error < 1e-10
        assert report.residual == pytest.approx(report.direct - report.residues - report.reflected)

    def test_theta_series_agrees(self, zeta):
        """Test sum a_n W(nx) against the vertical-line integral"""
        direct = lfunc.inverse_mellin_phi(zeta, 1.2).value
        assert abs(lfunc.theta_series(zeta, 1.2).value - direct) < 1e-9

    def test_residual_reflects_under_x_to_one_over_x(self, chi4):
        """Test residual(1/x) = -x conj(residual(x)) without a pole, even when the identity fails"""
        F = lfunc.dirichlet_l(chi4, 1000)
        wrong = dataclasses.replace(F, gamma=F.gamma.rotated(cmath.exp(0.1j)))
        for G in (F, wrong):
            for x in (0.7, 0.9):
                forward = fe_residual(G, x)
                backward = fe_residual(G, 1.0 / x)
                assert abs(backward + x * forward.conjugate()) <= 1e-9

    @pytest.mark.parametrize("x", [0.5, 0.8, 1.25, 2.0])
    def test_theta_series_agrees_across_range(self, chi3, x):
        F = lfunc.dirichlet_l(chi3, 1000)
        direct = lfunc.inverse_mellin_phi(F, x)
        series = lfunc.theta_series(F, x)
        assert abs(series.value - direct.value) <= 1e-9

    def test_rejects_non_positive_x(self, zeta):
        with pytest.raises(DomainError):
            fe_residual(zeta, 0.0)


class TestEulerProduct:
    """Tests for multiplicativity and log F coefficients"""

    def test_zeta_log_coefficients(self, zeta):
        """Test b_(p^j) = 1/j for zeta"""
        assert np.allclose(euler_log_coeffs(zeta, 3, 5), 1.0 / np.arange(1, 6))

    def test_realized_route_matches_local_factor(self):
        """Test the a_(p^k) route against the exact local factor"""
        explicit = from_coefficients("zeta-list", [1.0] * 1000)
        assert np.allclose(euler_log_coeffs(explicit, 2, 6), 1.0 / np.arange(1, 7))

    def test_not_enough_powers(self):
        explicit = from_coefficients("short", [1.0] * 10)
        with pytest.raises(ReconstructionError):
            euler_log_coeffs(explicit, 3, 4)

    def test_rejects_composite(self, zeta):
        with pytest.raises(DomainError):
            euler_log_coeffs(zeta, 4, 2)

    def test_delta_local_factor(self, delta):
        """Test 1 - a_p x + x^2 is recovered from a_(p^k)"""
        lp = local_factor_from_coefficients(delta, 2)
        assert np.allclose(lp.coeffs, [1.0, -delta.coefficients[1], 1.0])

    def test_local_factor_needs_three_powers(self):
        with pytest.raises(ReconstructionError):
            local_factor_from_coefficients(from_coefficients("short", [1.0] * 10), 3, r=1)

    def test_multiplicativity(self, delta):
        assert multiplicativity_check(delta.coefficients, 2000).passed
        broken = np.array(delta.coefficients[:200])
        broken[5] += 0.1
        report = multiplicativity_check(broken)
        assert (2, 3) in report.violations

    def test_from_euler(self):
        F = from_euler("zeta-euler", [], 100, default=(1.0, -1.0))
        assert np.allclose(F.coefficients, 1.0)

    def test_local_polynomial_needs_unit_constant(self):
        with pytest.raises(DomainError):
            LocalPolynomial(2, (2.0, 1.0))


class TestOperations:
    """Tests for twists, products and trivial zeros"""

    def test_twist(self, zeta, chi4):
        twisted = twist(zeta, chi4)
        assert np.allclose(twisted.coefficients[:8], [1, 0, -1, 0, 1, 0, -1, 0])
        assert twisted.gamma is None

    def test_product_is_divisor_function(self, zeta):
        F = product(zeta, zeta)
        assert F.coefficients[11] == pytest.approx(6.0)
        assert F.degree == 2.0
        assert F.pole_order == 2

    def test_zeta_squared_is_divisor_counts(self, zeta):
        """Test zeta * zeta has a_n = d(n) through 10^4"""
        F = product(zeta, zeta)
        assert np.allclose(F.coefficients, divisor_counts(10_000)[1:], rtol=0.0, atol=1e-9)

    def test_product_local_factor(self, zeta, chi3):
        F = product(zeta, lfunc.dirichlet_l(chi3, 1000))
        lp = F.source.local_factor(7)
        assert np.allclose(lp.coeffs, np.convolve([1, -1], [1, -chi3(7)]))

    def test_zeta_trivial_zeros(self, zeta):
        """Test the pole at s = 0 is cancelled by the pole of zeta at 1"""
        zeros = trivial_zeros(zeta.gamma, zeta.pole_order, (-6.0, 0.5))
        assert [z.location.real for z in zeros] == pytest.approx([-6.0, -4.0, -2.0])
        assert all(z.order == 1 for z in zeros)

    def test_delta_trivial_zeros(self, delta):
        zeros = trivial_zeros(delta.gamma, 0, (-8.0, 0.0))
        assert [z.location.real for z in zeros] == pytest.approx([-7.5, -6.5, -5.5])

    def test_bad_window(self, zeta):
        with pytest.raises(DomainError):
            trivial_zeros(zeta.gamma, 1, (1.0, -1.0))


class TestAxiomAudit:
    """Tests for the axiom audit"""

    def test_delta_admissible(self, delta):
        report = axiom_audit(delta, 2000)
        assert report.admissible
        assert report.degree == 2.0

    def test_counterexample_fails_euler_bound(self):
        report = axiom_audit(lfunc.counterexample(1000))
        failed = {c.axiom: c for c in report.checks if c.passed is False}
        assert set(failed) == {"euler_log"}
        assert failed["euler_log"].witness == 2

    def test_a1_failure(self):
        report = axiom_audit(from_coefficients("bad", [2.0, 1.0]))
        assert not report.admissible
        euler = next(c for c in report.checks if c.axiom == "euler_log")
        assert euler.passed is None

    def test_zeta_pole_passes(self, zeta):
        check = next(c for c in axiom_audit(zeta, 500).checks if c.axiom == "pole_order")
        assert check.passed is True

    def test_double_pole_is_allowed(self, zeta):
        """Test zeta * zeta (m = 2, no stored residue) is not failed on its pole"""
        report = axiom_audit(product(zeta, zeta), 2000)
        check = next(c for c in report.checks if c.axiom == "pole_order")
        assert check.passed is None
        assert "not computed" in check.detail
        assert "pole_order" not in {c.axiom for c in report.checks if c.passed is False}

    def test_higher_pole_with_residue(self, zeta):
        F = dataclasses.replace(zeta, pole_order=3, residue=2.0)
        check = next(c for c in axiom_audit(F, 100).checks if c.axiom == "pole_order")
        assert check.passed is True and check.detail == "m = 3"

    def test_audit_beyond_realization(self, zeta):
        with pytest.raises(DomainError):
            axiom_audit(zeta, zeta.N + 1)

    def test_dirichlet_degree_one(self):
        report = axiom_audit(lfunc.dirichlet_l(character(5, 1), 500))
        assert report.admissible and report.primitive
