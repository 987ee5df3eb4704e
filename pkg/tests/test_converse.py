import math

import pytest

from app.services.converse import (
    GL2Params,
    delta_params,
    delta_q_expansion,
    delta_transform_check,
    f_xy,
    g_series,
    g_series_check,
    j_closed_form_check,
    mellin_M_check,
    mellin_pair_check,
    pde_residual,
    single_coefficient_params,
    symmetry_report,
    symmetry_residual,
    t_function,
    t_symmetry_check,
)
from app.utils.errors import CannotCertifyError, DomainError, NonConvergenceError

ANGLES = (math.pi / 6, math.pi / 4, math.pi / 3)


@pytest.fixture(scope="module")
def delta_gl2():
    """Delta as GL(2) data with 512 coefficients"""
    return delta_params(512)


class TestParams:
    """Tests for GL(2) parameter validation"""

    def test_delta(self, delta_gl2):
        assert delta_gl2.N == 512
        assert delta_gl2.kappa == pytest.approx(2 * math.pi)
        assert delta_gl2.coefficients[1] == pytest.approx(-24 / 2 ** 5.5)

    def test_rejects_general_complex_beta(self):
        with pytest.raises(DomainError):
            GL2Params(0.5, 0.5 + 0.5j, 1.0, (1.0,))

    def test_rejects_small_alpha(self):
        with pytest.raises(DomainError):
            GL2Params(-0.6, 0.5, 1.0, (1.0,))

    def test_rejects_non_positive_q(self):
        with pytest.raises(DomainError):
            GL2Params(0.5, 0.5, 0.0, (1.0,))

    def test_rejects_coefficient_above_bound(self):
        with pytest.raises(DomainError):
            GL2Params(0.5, 0.5, 1.0, (1.0, 5.0))

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            GL2Params(0.5, 0.5, 1.0, ())


class TestBesselSeries:
    """Tests for f(x, y) and its symmetry"""

    def test_single_coefficient_closed_form(self):
        """Test alpha = beta = 1/2 gives sin(2 pi x) e^(-2 pi y) / sqrt(2 pi)"""
        params = single_coefficient_params()
        x, y = 0.3, 0.4
        expected = math.sin(2 * math.pi * x) * math.exp(-2 * math.pi * y) / math.sqrt(2 * math.pi)
        assert f_xy(params, x, y).real == pytest.approx(expected, rel=1e-10)

    def test_delta_symmetry(self, delta_gl2):
        report = symmetry_report(delta_gl2, [1.2, 2.0, 3.0], ANGLES)
        assert len(report.points) == 9
        assert report.max_residual <= 1e-8
        assert 0 < report.terms <= delta_gl2.N

    def test_perturbed_coefficient_breaks_symmetry(self, delta_gl2):
        a = list(delta_gl2.coefficients)
        a[1] += 0.1
        report = symmetry_report(delta_gl2.with_coefficients(a), [1.2, 2.0, 3.0], ANGLES)
        assert report.max_residual > 1e-4

    def test_unit_circle_is_trivially_symmetric(self, delta_gl2):
        """Test r = 1 compares f with its own conjugate"""
        assert abs(symmetry_residual(delta_gl2, 1.0, math.pi / 4)) <= 1e-12

    def test_rows(self, delta_gl2):
        rows = symmetry_report(delta_gl2, [2.0], [math.pi / 4]).rows()
        assert len(rows) == 1 and len(rows[0]) == 8

    def test_rejects_non_positive_point(self, delta_gl2):
        with pytest.raises(DomainError):
            f_xy(delta_gl2, 0.0, 1.0)

    def test_rejects_tiny_y(self, delta_gl2):
        with pytest.raises(CannotCertifyError):
            f_xy(delta_gl2, 1.0, 1e-4)

    def test_needs_enough_coefficients(self):
        with pytest.raises(CannotCertifyError):
            f_xy(delta_params(4), 0.5, 0.01)

    def test_rejects_bad_angle(self, delta_gl2):
        with pytest.raises(DomainError):
            symmetry_residual(delta_gl2, 2.0, math.pi / 2)


class TestMellinIdentities:
    """Tests for the Bessel-pair Mellin transform and T(s)"""

    def test_spot_value(self):
        """Test int_0^inf J_(1/2)(u) K_(1/2)(u) du = pi/4"""
        quad, rhs, _ = mellin_pair_check(0.5, 0.5, 1.0, 1.0, 1.0)
        assert quad.real == pytest.approx(math.pi / 4, abs=1e-6)
        assert rhs.real == pytest.approx(math.pi / 4, abs=1e-10)

    @pytest.mark.parametrize("alpha", [0.5, 5.5])
    @pytest.mark.parametrize("a,b", [(1.0, 1.0), (1.0, 2.0), (0.5, 1.0)])
    def test_closed_form(self, alpha, a, b):
        quad, rhs, diff = mellin_pair_check(alpha, 0.5, a, b, 1.5 + 0.5j)
        assert abs(diff) <= 1e-6 * abs(rhs)

    def test_imaginary_beta(self):
        quad, rhs, diff = mellin_pair_check(0.5, 0.7j, 1.0, 1.5, 1.2)
        assert abs(diff) <= 1e-6 * abs(rhs)

    def test_pair_domain(self):
        with pytest.raises(DomainError):
            mellin_pair_check(0.5, 0.5, 0.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            mellin_pair_check(0.5, 0.5, 1.0, 1.0, -0.5)

    @pytest.mark.parametrize("beta", [0.5, 0.5j])
    @pytest.mark.parametrize("theta", ANGLES)
    @pytest.mark.parametrize("s", [0.3, 0.3 + 0.7j, 0.8 + 2j])
    def test_t_symmetry(self, beta, theta, s):
        left, right, diff = t_symmetry_check(5.5, beta, theta, s)
        assert abs(diff) <= 1e-9 * max(1.0, abs(left))

    def test_t_at_centre(self):
        left, right, diff = t_symmetry_check(0.5, 0.5, math.pi / 4, 0.5)
        assert diff == 0 and left == right

    def test_t_rejects_angle(self):
        with pytest.raises(DomainError):
            t_function(0.5, 0.5, 0.0, 0.3)

    @pytest.mark.slow
    def test_m_closed_form_for_delta(self, delta_gl2):
        quadrature, closed, diff = mellin_M_check(delta_gl2, math.pi / 4, 0.5 + 1j)
        assert abs(diff) <= 1e-4 * abs(closed)

    def test_m_diverges_at_origin(self):
        params = single_coefficient_params(alpha=-0.5)
        with pytest.raises(NonConvergenceError):
            mellin_M_check(params, math.pi / 4, 0.25)


class TestDeltaExample:
    """Tests for the discriminant form identities"""

    @pytest.mark.parametrize("x", [1.0, 2.5, 7.0, 30.0, 60.0])
    def test_j_closed_form(self, x):
        closed, generic, diff = j_closed_form_check(x)
        assert abs(diff) <= 1e-9 * max(abs(generic), 1e-3)

    def test_j_rejects_non_positive(self):
        with pytest.raises(DomainError):
            j_closed_form_check(0.0)

    def test_q_expansion_leading_term(self):
        """Test Delta(iy) ~ e^(-2 pi y) (1 - 24 e^(-2 pi y)) for large y"""
        y = 4.0
        q = math.exp(-2 * math.pi * y)
        assert delta_q_expansion(y) == pytest.approx(q - 24 * q * q + 252 * q ** 3, rel=1e-12)

    @pytest.mark.parametrize("y", [1.0, 1.5, 2.0, 3.0])
    def test_transformation(self, y):
        lhs, rhs, diff = delta_transform_check(y)
        assert abs(diff) <= 1e-10 * abs(rhs)

    def test_q_expansion_domain(self):
        with pytest.raises(DomainError):
            delta_q_expansion(-1.0)

    def test_q_expansion_refuses_tiny_y(self):
        """Test y so small the series outruns the tau table is refused before any work"""
        with pytest.raises(CannotCertifyError):
            delta_q_expansion(1e-6)

    @pytest.mark.parametrize("y", [1.5, 2.0])
    def test_g_series(self, delta_gl2, y):
        """Test g(1/y) = y^12 g(y) and g(y) = Delta(iy) for k = 12"""
        lhs, rhs, diff = g_series_check(delta_gl2, 12, y)
        assert abs(diff) <= 1e-10 * abs(rhs)
        assert g_series(delta_gl2, 12, y).real == pytest.approx(delta_q_expansion(y), rel=1e-10)

    def test_g_series_rejects_odd_weight(self, delta_gl2):
        with pytest.raises(DomainError):
            g_series_check(delta_gl2, 11, 1.5)

    def test_g_series_rejects_mismatched_alpha(self, delta_gl2):
        with pytest.raises(DomainError):
            g_series_check(delta_gl2, 10, 1.5)


class TestPDE:
    """Tests for the Laplace-type equation satisfied by f"""

    def test_single_coefficient(self):
        """Test sin(2 pi x) e^(-2 pi y) is harmonic to stencil accuracy"""
        residual = pde_residual(single_coefficient_params(), 0.3, 1.0, 1e-3)
        assert residual <= 1e-6

    def test_delta_second_order(self, delta_gl2):
        """Test halving h divides the stencil residual by about 4"""
        coarse = pde_residual(delta_gl2, 0.4, 0.3, 1e-2)
        fine = pde_residual(delta_gl2, 0.4, 0.3, 5e-3)
        assert 3.5 <= coarse / fine <= 4.5

    def test_rejects_wide_stencil(self, delta_gl2):
        with pytest.raises(DomainError):
            pde_residual(delta_gl2, 0.01, 0.3, 1e-2)
