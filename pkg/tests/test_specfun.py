import cmath
import math

import numpy as np
import pytest
import scipy.special as sp
from pydantic import ValidationError
from scipy.integrate import quad

from app.services.specfun import (
    Accuracy,
    bessel_h,
    bessel_j,
    bessel_k,
    bessel_k_array,
    default_accuracy,
    gamma,
    hurwitz_zeta,
    hyp2f1,
    log_gamma,
    log_gamma_array,
)
from app.utils.errors import (
    AccuracyError,
    DomainError,
    ParameterDegeneracyError,
    PoleError,
)


class TestLogGamma:
    """Tests for complex log-gamma"""

    def test_integer_and_half_values(self):
        """Test Gamma at 1, 5 and 1/2"""
        assert abs(log_gamma(1.0)) < 1e-14
        assert log_gamma(5.0).real == pytest.approx(math.log(24.0), abs=1e-13)
        assert log_gamma(0.5).real == pytest.approx(0.5 * math.log(math.pi), abs=1e-13)

    @pytest.mark.parametrize("z", [0.3 + 0.2j, 2.5 - 7j, 12 + 40j, -3.7 + 0.1j, -0.5 + 3j, 0.01 + 0.0j])
    def test_matches_scipy(self, z):
        """Test against scipy loggamma on both half-planes"""
        assert abs(log_gamma(z) - complex(sp.loggamma(z))) < 1e-11 * max(1.0, abs(sp.loggamma(z)))

    def test_reflection(self):
        """Test Gamma(z) Gamma(1 - z) = pi / sin(pi z)"""
        z = 0.3 + 0.2j
        assert abs(gamma(z) * gamma(1 - z) - math.pi / cmath.sin(math.pi * z)) < 1e-12

    def test_pole_raises(self):
        """Test non-positive integers are rejected"""
        with pytest.raises(PoleError):
            log_gamma(-2.0)
        with pytest.raises(PoleError):
            log_gamma(0.0)

    def test_array_with_poles_as_inf(self):
        """Test the vectorised form marks poles with +inf"""
        out = log_gamma_array([-1.0, 2.0], poles="inf")
        assert np.isinf(out[0].real)
        assert abs(out[1]) < 1e-14


class TestHurwitzZeta:
    """Tests for the Euler-Maclaurin Hurwitz zeta"""

    @pytest.mark.parametrize("s", [1.5, 2.0, 3.7])
    @pytest.mark.parametrize("v", [0.25, 1.0, 17.5])
    def test_real_against_scipy(self, s, v):
        value, bound = hurwitz_zeta(s, v)
        assert value.real == pytest.approx(sp.zeta(s, v), rel=1e-13)
        assert abs(value.imag) < 1e-15 and 0.0 <= bound < 1e-13

    def test_shift_identity_off_the_real_axis(self):
        """Test zeta(s, v) - zeta(s, v + 1) = v^-s at complex s"""
        s, v = complex(2.0, 5.0), 0.3
        lhs = hurwitz_zeta(s, v)[0] - hurwitz_zeta(s, v + 1.0)[0]
        assert abs(lhs - v ** -s) <= 1e-12

    def test_catalan(self):
        """Test zeta(2, 1/4) - zeta(2, 3/4) = 16 G"""
        catalan = 0.915965594177219015
        diff = hurwitz_zeta(2.0, 0.25)[0] - hurwitz_zeta(2.0, 0.75)[0]
        assert diff.real == pytest.approx(16.0 * catalan, rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            hurwitz_zeta(1.0, 1.0)
        with pytest.raises(DomainError):
            hurwitz_zeta(2.0, 0.0)


class TestAccuracy:
    """Tests for the tolerance contract"""

    def test_default_from_settings(self):
        acc = default_accuracy()
        assert acc.abs_tol > 0 and acc.rel_tol > 0

    def test_override(self):
        acc = default_accuracy(1e-6)
        assert acc.abs_tol == 1e-6 and acc.rel_tol == 1e-6

    def test_rejects_non_positive(self):
        with pytest.raises(ValidationError):
            Accuracy(abs_tol=0.0, rel_tol=1e-12, max_terms=10)


class TestBesselJ:
    """Tests for Bessel J and the H kernel"""

    @pytest.mark.parametrize("x", [0.1, 1.0, 5.0, 30.0, 100.0])
    def test_half_order_closed_form(self, x):
        """Test J_(1/2)(x) = sqrt(2/(pi x)) sin x"""
        assert bessel_j(0.5, x) == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.sin(x), abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 1.5, 5.5, 10.0])
    @pytest.mark.parametrize("x", [0.5, 3.0, 15.0, 40.0])
    def test_matches_scipy(self, alpha, x):
        """Test across the series, bridge and Hankel regimes"""
        assert bessel_j(alpha, x) == pytest.approx(sp.jv(alpha, x), rel=1e-9, abs=1e-12)

    def test_h_kernel(self):
        """Test H_(1/2)(x) = sqrt(2/pi) sin x"""
        assert bessel_h(0.5, 2.0) == pytest.approx(math.sqrt(2 / math.pi) * math.sin(2.0), abs=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_j(-1.0, 1.0)
        with pytest.raises(DomainError):
            bessel_j(0.5, 0.0)


class TestBesselK:
    """Tests for Bessel K by the cosh integral"""

    @pytest.mark.parametrize("y", [0.05, 1.0, 10.0])
    def test_half_order_closed_form(self, y):
        """Test K_(1/2)(y) = sqrt(pi/(2y)) e^-y"""
        expected = math.sqrt(math.pi / (2 * y)) * math.exp(-y)
        assert bessel_k(0.5, y).real == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("nu", [0.0, 0.3, 2.5])
    def test_matches_scipy(self, nu):
        y = np.array([0.05, 1.0, 10.0])
        assert np.allclose(bessel_k_array(nu, y).real, sp.kv(nu, y), rtol=1e-10)

    def test_imaginary_order(self):
        """Test K_(i nu) against direct quadrature of exp(-y cosh t) cos(nu t)"""
        nu, y = 0.8, 1.3
        expected, _ = quad(lambda t: math.exp(-y * math.cosh(t)) * math.cos(nu * t), 0, 40, limit=200)
        value = bessel_k(1j * nu, y)
        assert abs(value.imag) < 1e-12
        assert value.real == pytest.approx(expected, rel=1e-9)

    def test_rejects_general_complex_order(self):
        with pytest.raises(DomainError):
            bessel_k(0.5 + 0.5j, 1.0)

    def test_rejects_non_positive_argument(self):
        with pytest.raises(DomainError):
            bessel_k(0.5, 0.0)

    def test_large_imaginary_order_small_argument(self):
        """Test the cancellation guard below MIN_Y"""
        with pytest.raises(AccuracyError):
            bessel_k(20j, 1e-5)


class TestHyp2f1:
    """Tests for Gauss 2F1 on x <= 0"""

    @pytest.mark.parametrize("x", [0.3, 3.0])
    def test_log_closed_form(self, x):
        """Test 2F1(1, 1; 2; -x) = log(1 + x) / x on the series and Pfaff branches"""
        assert hyp2f1(1, 1, 2, -x).real == pytest.approx(math.log1p(x) / x, rel=1e-12)

    def test_connection_branch(self):
        """Test 2F1(1/2, 1; 3/2; -x^2) = atan(x)/x far from the origin"""
        assert hyp2f1(0.5, 1, 1.5, -100.0).real == pytest.approx(math.atan(10.0) / 10.0, rel=1e-10)

    def test_spot_value(self):
        assert hyp2f1(1, 0.5, 1.5, -1.0).real == pytest.approx(math.pi / 4, rel=1e-12)

    @pytest.mark.parametrize("x", [-0.4, -2.0, -50.0])
    def test_matches_scipy(self, x):
        a, b, c = 0.7, 1.9, 2.35
        assert hyp2f1(a, b, c, x).real == pytest.approx(sp.hyp2f1(a, b, c, x), rel=1e-9)

    def test_zero_argument(self):
        assert hyp2f1(3, 4, 5, 0.0) == 1.0

    def test_degenerate_connection(self):
        """Test integer c - a - b on the connection branch is refused"""
        with pytest.raises(ParameterDegeneracyError):
            hyp2f1(1, 1, 2, -50.0)

    def test_pole_in_c(self):
        with pytest.raises(PoleError):
            hyp2f1(1, 1, -2, -0.1)

    def test_positive_argument(self):
        with pytest.raises(DomainError):
            hyp2f1(1, 1, 2, 0.5)
