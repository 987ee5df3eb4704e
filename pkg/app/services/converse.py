"""
GL(2) converse machinery.

For Phi(s) = (sqrt(q)/pi)^s Gamma((s+alpha+beta+1/2)/2) Gamma((s+alpha-beta+1/2)/2) F(s)
the Bessel series
    f(x, y) = y^(1/2) sum a_n H_alpha(2 pi n x / sqrt(q)) K_beta(2 pi n y / sqrt(q))
satisfies f(r e^(i theta)) = conj f(r^-1 e^(i theta)) exactly when
Phi(s) = conj Phi(1 - conj s). This module evaluates both sides, the Mellin
identities linking them and the holomorphic (beta = 1/2) reductions.
"""
import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from app.config import settings
from app.services.specfun import (
    Accuracy,
    bessel_h,
    bessel_j,
    bessel_k,
    bessel_k_array,
    default_accuracy,
    hyp2f1,
    log_gamma,
)
from app.services.tau import MAX_TAU_INDEX, tau_normalized
from app.utils.errors import CannotCertifyError, DomainError, NonConvergenceError

logger = structlog.get_logger()

# Gauss-Legendre nodes per panel; the check run uses twice as many
PANEL_NODES = 20
# Log-space trapezoid step for the r-integral of M(s)
MELLIN_STEP = 0.02
# Cap on the terms used by the truncated M(s) comparison
MELLIN_TERMS = 24


@dataclass(frozen=True)
class GL2Params:
    """alpha real, beta real or purely imaginary, q > 0, coefficients a_1..a_N"""

    alpha: float
    beta: complex
    q: float
    coefficients: Tuple[complex, ...]
    ramanujan_constant: float = 1.0
    ramanujan_exponent: float = 0.0
    # a_n = 0 past the list instead of unknown
    finite: bool = False

    def __post_init__(self):
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "coefficients", tuple(complex(a) for a in self.coefficients))
        if not self.coefficients:
            raise DomainError("at least one coefficient is required")
        if not self.q > 0:
            raise DomainError(f"q must be positive, got {self.q}")
        if self.alpha < -0.5:
            raise DomainError(f"alpha must be >= -1/2, got {self.alpha}")
        if self.beta.real != 0 and self.beta.imag != 0:
            raise DomainError(f"beta must be real or purely imaginary, got {self.beta}")
        a = np.abs(np.asarray(self.coefficients))
        n = np.arange(1, len(a) + 1, dtype=float)
        bound = self.ramanujan_constant * n ** self.ramanujan_exponent
        if np.any(a > bound * (1 + 1e-12)):
            worst = int(np.argmax(a / bound)) + 1
            raise DomainError(
                f"|a_{worst}| exceeds the stated bound C n^e'", n=worst
            )

    @property
    def N(self) -> int:
        return len(self.coefficients)

    @property
    def kappa(self) -> float:
        return 2.0 * math.pi / math.sqrt(self.q)

    def with_coefficients(self, coefficients: Sequence[complex]) -> "GL2Params":
        return GL2Params(
            self.alpha, self.beta, self.q, tuple(coefficients),
            self.ramanujan_constant, self.ramanujan_exponent, self.finite,
        )


def delta_params(N: int = 512) -> GL2Params:
    """alpha = 11/2, beta = 1/2, q = 1, a_n = tau(n) / n^(11/2)"""
    if N > MAX_TAU_INDEX:
        raise CannotCertifyError(f"tau is realized up to {MAX_TAU_INDEX}")
    return GL2Params(
        alpha=5.5,
        beta=0.5,
        q=1.0,
        coefficients=tuple(tau_normalized(N)),
        # d(n) < 4 n^(1/3)
        ramanujan_constant=4.0,
        ramanujan_exponent=1.0 / 3.0,
    )


def single_coefficient_params(alpha: float = 0.5, beta: complex = 0.5, q: float = 1.0,
                              value: complex = 1.0) -> GL2Params:
    """a = (value, 0, 0, ...)"""
    return GL2Params(
        alpha=alpha, beta=beta, q=q, coefficients=(value,),
        ramanujan_constant=max(1.0, abs(value)), finite=True,
    )


# ---------------------------------------------------------------------------
# The Bessel series
# ---------------------------------------------------------------------------

def _k_envelope(beta: complex, y0: float) -> float:
    """B with |K_beta(y)| <= B e^-y for all y >= y0"""
    # K_nu(y) sqrt(y) e^y increases to sqrt(pi/2) for |nu| < 1/2, decreases otherwise
    if beta.imag != 0 or abs(beta.real) < 0.5:
        return math.sqrt(math.pi / (2.0 * y0))
    return abs(bessel_k(abs(beta.real), y0)) * math.exp(y0)


def _series_terms(params: GL2Params, x: float, y: float, acc: Accuracy) -> int:
    """
    Terms needed for the tail of f(x, y) to fall below abs_tol, from
    |a_n| <= C n^e', |H_alpha(t)| <= c_H (1 + t)^(1/2) and K decay.
    """
    if params.finite:
        return params.N
    kappa = params.kappa
    c_h = 1.0 if params.alpha >= 0 else 2.0
    B = _k_envelope(params.beta, kappa * y)
    C, e = params.ramanujan_constant, params.ramanujan_exponent

    def term(n: float) -> float:
        return C * c_h * B * math.sqrt(y) * n ** e * math.sqrt(1 + kappa * x * n) * math.exp(-kappa * y * n)

    N = 1
    while True:
        ratio = ((N + 2) / (N + 1)) ** (e + 0.5) * math.exp(-kappa * y)
        if ratio < 1.0 and term(N + 1) / (1.0 - ratio) < acc.abs_tol:
            return N
        N += max(1, N // 4)
        if N > acc.max_terms:
            raise CannotCertifyError(f"f({x}, {y}) needs more than {acc.max_terms} terms")


def _f_partial(params: GL2Params, x: float, y: float, N: int,
               accuracy: Optional[Accuracy] = None) -> complex:
    a = np.asarray(params.coefficients[:N], dtype=complex)
    n = np.arange(1, len(a) + 1, dtype=float)
    nonzero = np.flatnonzero(a)
    if nonzero.size == 0:
        return 0j
    kappa = params.kappa
    h = np.array([bessel_h(params.alpha, kappa * k * x, accuracy) for k in n[nonzero]])
    k = bessel_k_array(params.beta, kappa * n[nonzero] * y, accuracy)
    return complex(math.sqrt(y) * np.sum(a[nonzero] * h * k))


def f_xy(params: GL2Params, x: float, y: float, accuracy: Optional[Accuracy] = None) -> complex:
    """y^(1/2) sum a_n H_alpha(2 pi n x / sqrt q) K_beta(2 pi n y / sqrt q), certified tail"""
    if not (x > 0 and y > 0):
        raise DomainError(f"f needs x, y > 0, got ({x}, {y})")
    if y < settings.MIN_Y:
        raise CannotCertifyError(f"y = {y} is below the minimum {settings.MIN_Y}", y=y)
    acc = accuracy or default_accuracy()
    N = _series_terms(params, x, y, acc)
    if N > params.N and not params.finite:
        raise CannotCertifyError(
            f"f({x:g}, {y:g}) needs {N} coefficients, {params.N} supplied", terms=N
        )
    return _f_partial(params, x, y, min(N, params.N), accuracy)


def _check_angle(theta: float) -> None:
    if not 0 < theta < math.pi / 2:
        raise DomainError(f"theta must lie in (0, pi/2), got {theta}")


def symmetry_residual(params: GL2Params, r: float, theta: float,
                      accuracy: Optional[Accuracy] = None) -> complex:
    """f(r e^(i theta)) - conj f(r^-1 e^(i theta))"""
    _check_angle(theta)
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    c, s = math.cos(theta), math.sin(theta)
    return f_xy(params, r * c, r * s, accuracy) - f_xy(params, c / r, s / r, accuracy).conjugate()


@dataclass
class SymmetryPoint:
    r: float
    theta: float
    inner: complex
    outer: complex
    residual: float
    terms: int


@dataclass
class SymmetryReport:
    points: List[SymmetryPoint]

    @property
    def max_residual(self) -> float:
        return max((p.residual for p in self.points), default=0.0)

    @property
    def terms(self) -> int:
        return max((p.terms for p in self.points), default=0)

    def rows(self) -> List[Tuple]:
        return [
            (p.r, p.theta, p.inner.real, p.inner.imag, p.outer.real, p.outer.imag, p.residual, p.terms)
            for p in self.points
        ]


def symmetry_report(params: GL2Params, rs: Sequence[float], thetas: Sequence[float],
                    accuracy: Optional[Accuracy] = None) -> SymmetryReport:
    acc = accuracy or default_accuracy()
    points = []
    for theta in thetas:
        _check_angle(theta)
        c, s = math.cos(theta), math.sin(theta)
        for r in rs:
            if not r > 0:
                raise DomainError(f"r must be positive, got {r}")
            inner = f_xy(params, r * c, r * s, acc)
            outer = f_xy(params, c / r, s / r, acc).conjugate()
            terms = max(_series_terms(params, r * c, r * s, acc), _series_terms(params, c / r, s / r, acc))
            points.append(SymmetryPoint(r, theta, inner, outer, abs(inner - outer), terms))
    report = SymmetryReport(points)
    logger.info("symmetry_checked", points=len(points), max_residual=report.max_residual)
    return report


# ---------------------------------------------------------------------------
# Mellin identities
# ---------------------------------------------------------------------------

def _panels(a: float, b: float, sigma: float, beta: complex, tol: float) -> np.ndarray:
    """
    Panel edges on (0, U]: geometric towards 0, then width pi/a; U is where
    |K_beta(b U)| U^sigma drops below tol.
    """
    U = 1.0 / b
    while abs(bessel_k(beta, b * U)) * U ** sigma * max(1.0, 1.0 / b) > tol:
        U *= 1.25
    width = math.pi / a
    first = min(width, U, 1.0)
    small = first * 2.0 ** -np.arange(40, -1, -1)
    rest = np.arange(first + width, U + width, width)
    return np.concatenate(([0.0], small, rest[rest > first]))


def _gauss_panels(fn, edges: np.ndarray, order: int) -> complex:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    u = (0.5 * (hi + lo))[:, None] + half[:, None] * nodes[None, :]
    return complex(np.sum(half[:, None] * weights[None, :] * fn(u.ravel()).reshape(u.shape)))


def _pair_integrand(alpha: float, beta: complex, a: float, b: float, s: complex):
    def fn(u: np.ndarray) -> np.ndarray:
        j = np.array([bessel_j(alpha, a * v) for v in u])
        k = bessel_k_array(beta, b * u)
        return j * k * np.exp((s - 1.0) * np.log(u))

    return fn


def mellin_pair_rhs(alpha: float, beta: complex, a: float, b: float, s: complex) -> complex:
    """(a/b)^alpha b^-s 2^(s-2) Gamma(l) Gamma(m) / Gamma(alpha + 1) 2F1(l, m; alpha + 1; -a^2/b^2)"""
    l = (s + alpha + beta) / 2.0
    m = (s + alpha - beta) / 2.0
    log_front = (
        alpha * math.log(a / b) - s * math.log(b) + (s - 2.0) * math.log(2.0)
        + log_gamma(l) + log_gamma(m) - log_gamma(alpha + 1.0)
    )
    return cmath.exp(log_front) * hyp2f1(l, m, alpha + 1.0, -(a * a) / (b * b))


def mellin_pair_check(alpha: float, beta: complex, a: float, b: float, s: complex,
                      accuracy: Optional[Accuracy] = None) -> Tuple[complex, complex, complex]:
    """
    int_0^inf J_alpha(a u) K_beta(b u) u^s du/u by panel Gauss-Legendre
    against the closed form.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"a and b must be positive, got a = {a}, b = {b}")
    s = complex(s)
    if s.real <= 0:
        raise DomainError(f"Re s must be positive, got {s}")
    acc = accuracy or default_accuracy()
    beta = complex(beta)
    edges = _panels(a, b, s.real, beta, acc.abs_tol)
    fn = _pair_integrand(alpha, beta, a, b, s)
    coarse = _gauss_panels(fn, edges, PANEL_NODES)
    fine = _gauss_panels(fn, edges, 2 * PANEL_NODES)
    # quadrature floor: the Bessel kernels are certified to rel_tol, not below
    floor = max(1e-8, 100 * acc.rel_tol) * max(1.0, abs(fine))
    if abs(fine - coarse) > floor:
        raise NonConvergenceError(
            f"panel quadrature disagrees by {abs(fine - coarse):.3e}", s=str(s)
        )
    rhs = mellin_pair_rhs(alpha, beta, a, b, s)
    return fine, rhs, fine - rhs


def t_function(alpha: float, beta: complex, theta: float, s: complex) -> complex:
    """(sin theta)^-s 2F1((s+alpha+beta+1/2)/2, (s+alpha-beta+1/2)/2; alpha+1; -cot^2 theta)"""
    _check_angle(theta)
    s = complex(s)
    cot = 1.0 / math.tan(theta)
    return cmath.exp(-s * math.log(math.sin(theta))) * hyp2f1(
        (s + alpha + beta + 0.5) / 2.0,
        (s + alpha - beta + 0.5) / 2.0,
        alpha + 1.0,
        -cot * cot,
    )


def t_symmetry_check(alpha: float, beta: complex, theta: float,
                     s: complex) -> Tuple[complex, complex, complex]:
    """T(s), T(1 - s) and their difference"""
    s = complex(s)
    left = t_function(alpha, beta, theta, s)
    if s == 0.5:
        return left, left, 0j
    right = t_function(alpha, beta, theta, 1.0 - s)
    return left, right, left - right


def phi_truncated(params: GL2Params, s: complex, N: int) -> complex:
    """(sqrt q / pi)^s Gamma(.) Gamma(.) F_N(s) with F_N the first N terms"""
    s = complex(s)
    a = np.asarray(params.coefficients[:N], dtype=complex)
    n = np.arange(1, len(a) + 1, dtype=float)
    f_n = complex(np.sum(a * np.exp(-s * np.log(n))))
    log_front = (
        s * math.log(math.sqrt(params.q) / math.pi)
        + log_gamma((s + params.alpha + params.beta + 0.5) / 2.0)
        + log_gamma((s + params.alpha - params.beta + 0.5) / 2.0)
    )
    return cmath.exp(log_front) * f_n


def mellin_M_closed(params: GL2Params, theta: float, s: complex, N: int) -> complex:
    """2^(-3/2) (cos theta)^(1/2) (cot theta)^alpha T(s) Phi_N(s) / Gamma(1 + alpha)"""
    _check_angle(theta)
    alpha = params.alpha
    front = (
        -1.5 * math.log(2.0) + 0.5 * math.log(math.cos(theta))
        + alpha * math.log(1.0 / math.tan(theta)) - log_gamma(1.0 + alpha).real
    )
    return math.exp(front) * t_function(alpha, params.beta, theta, s) * phi_truncated(params, s, N)


def mellin_M_check(params: GL2Params, theta: float, s: complex,
                   terms: Optional[int] = None,
                   accuracy: Optional[Accuracy] = None) -> Tuple[complex, complex, complex]:
    """
    M(s) = int_0^inf f_N(r e^(i theta)) r^(s - 1/2) dr / r by trapezoid in
    log r, against the closed form with the same truncation N.
    """
    _check_angle(theta)
    s = complex(s)
    N = min(terms or MELLIN_TERMS, params.N)
    # f_N ~ r^(alpha + 1 - |Re beta|) at 0; the integrand needs a positive exponent
    small_power = s.real + params.alpha + 0.5 - abs(params.beta.real)
    if small_power <= 0:
        raise NonConvergenceError(f"M({s}) diverges at r = 0 for these parameters")
    acc = accuracy or default_accuracy()
    c, sn = math.cos(theta), math.sin(theta)
    # f_N(r e^(i theta)) <= e^(-kappa r sin theta) past r_max
    r_max = (60.0 + abs(s.real) * 4.0) / (params.kappa * sn)
    u_lo = max(-80.0, math.log(acc.abs_tol) / small_power - 2.0)
    u = np.arange(u_lo, math.log(r_max) + MELLIN_STEP, MELLIN_STEP)
    r = np.exp(u)
    values = np.array([_f_partial(params, rv * c, rv * sn, N) for rv in r])
    quadrature = complex(MELLIN_STEP * np.sum(values * np.exp((s - 0.5) * u)))
    closed = mellin_M_closed(params, theta, s, N)
    logger.debug("mellin_m_checked", s=str(s), theta=theta, terms=N, nodes=len(u))
    return quadrature, closed, quadrature - closed


def j_closed_form(x: float) -> float:
    """(pi/2)^(1/2) x^(1/2) J_(11/2)(x) in elementary functions"""
    c, s = math.cos(x), math.sin(x)
    return (
        c * (-1.0 + 105.0 / x ** 2 - 945.0 / x ** 4)
        + s * (15.0 / x - 420.0 / x ** 3 + 945.0 / x ** 5)
    )


def j_closed_form_check(x: float, accuracy: Optional[Accuracy] = None) -> Tuple[float, float, float]:
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    closed = j_closed_form(x)
    generic = math.sqrt(math.pi / 2.0) * bessel_h(5.5, x, accuracy)
    return closed, generic, closed - generic


# ---------------------------------------------------------------------------
# Holomorphic reductions
# ---------------------------------------------------------------------------

def _exp_series(coeffs: np.ndarray, decay: float, bound, acc: Accuracy, cap: int) -> complex:
    """
    sum c_n e^(-decay n) until the tail bound sum_{n>N} bound(n) e^(-decay n)
    is below rel_tol of the partial sum.
    """
    N = 8
    while True:
        n = np.arange(1, min(N, len(coeffs)) + 1, dtype=float)
        partial = complex(np.sum(coeffs[: len(n)] * np.exp(-decay * n)))
        ratio = bound(N + 2) / bound(N + 1) * math.exp(-decay)
        if ratio < 1.0:
            tail = bound(N + 1) * math.exp(-decay * (N + 1)) / (1.0 - ratio)
            if tail <= max(acc.rel_tol * abs(partial) * 1e-2, 1e-300):
                return partial
        if N >= cap:
            raise CannotCertifyError(
                f"series with decay {decay:.3g} needs more than {cap} terms; "
                "evaluate on the side with the larger argument"
            )
        N = min(2 * N, cap)


def delta_q_expansion(y: float, accuracy: Optional[Accuracy] = None) -> float:
    """Delta(iy) = sum tau(n) e^(-2 pi n y), with |tau(n)| <= 2 n^6"""
    if not y > 0:
        raise DomainError(f"y must be positive, got {y}")
    acc = accuracy or default_accuracy()
    decay = 2.0 * math.pi * y
    if 60.0 / decay > MAX_TAU_INDEX:
        raise CannotCertifyError(f"Delta(i {y}) needs more than {MAX_TAU_INDEX} terms")
    cap = min(MAX_TAU_INDEX, max(64, int(80.0 / decay) + 64))
    length = 1 << (cap - 1).bit_length()
    n = np.arange(1, length + 1, dtype=float)
    tau = tau_normalized(length) * n ** 5.5
    return _exp_series(tau, decay, lambda k: 2.0 * k ** 6, acc, length).real


def delta_transform_check(y: float, accuracy: Optional[Accuracy] = None) -> Tuple[float, float, float]:
    """Delta(iy) against y^-12 Delta(i/y); Delta(-1/z) = z^12 Delta(z) at z = iy"""
    lhs = delta_q_expansion(y, accuracy)
    if y == 1.0:
        return lhs, lhs, 0.0
    rhs = y ** -12 * delta_q_expansion(1.0 / y, accuracy)
    return lhs, rhs, lhs - rhs


def g_series(params: GL2Params, k: int, y: float, accuracy: Optional[Accuracy] = None) -> complex:
    """g(y) = sum a_n n^((k-1)/2) e^(-2 pi n y / sqrt q)"""
    acc = accuracy or default_accuracy()
    a = np.asarray(params.coefficients, dtype=complex)
    if not np.any(a):
        return 0j
    n = np.arange(1, len(a) + 1, dtype=float)
    weight = (k - 1) / 2.0
    coeffs = a * n ** weight
    C, e = params.ramanujan_constant, params.ramanujan_exponent
    decay = params.kappa * y
    if params.finite:
        return complex(np.sum(coeffs * np.exp(-decay * n)))
    return _exp_series(coeffs, decay, lambda m: C * m ** (e + weight), acc, len(a))


def g_series_check(params: GL2Params, k: int, y: float,
                   accuracy: Optional[Accuracy] = None) -> Tuple[complex, complex, complex]:
    """g(1/y) against y^k g(y) for alpha = (k-1)/2, beta = 1/2"""
    if k % 2 or k < 2:
        raise DomainError(f"k must be a positive even integer, got {k}")
    if abs(params.alpha - (k - 1) / 2.0) > 1e-12 or params.beta != 0.5:
        raise DomainError("g-series reduction needs alpha = (k-1)/2 and beta = 1/2")
    if not y > 0:
        raise DomainError(f"y must be positive, got {y}")
    lhs = g_series(params, k, 1.0 / y, accuracy)
    if y == 1.0:
        return lhs, lhs, 0j
    rhs = y ** k * g_series(params, k, y, accuracy)
    return lhs, rhs, lhs - rhs


def pde_residual(params: GL2Params, x: float, y: float, h: float,
                 accuracy: Optional[Accuracy] = None) -> float:
    """
    |5-point Laplacian of f - ((alpha^2 - 1/4)/x^2 + (beta^2 - 1/4)/y^2) f| at (x, y).
    """
    if not (h > 0 and x > 2 * h and y > 2 * h):
        raise DomainError(f"need x, y > 2h > 0, got x = {x}, y = {y}, h = {h}")
    f = lambda u, v: f_xy(params, u, v, accuracy)  # noqa: E731
    center = f(x, y)
    laplacian = (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * center) / (h * h)
    potential = (params.alpha ** 2 - 0.25) / x ** 2 + (params.beta ** 2 - 0.25) / y ** 2
    return float(abs(laplacian - potential * center))
