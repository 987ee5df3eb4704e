"""
Special-function kernel: complex log-gamma, Bessel J and K, Gauss 2F1.

Everything runs in double precision. Each routine carries its own error
estimate and raises instead of returning a value it cannot certify.
"""
import cmath
import math
from typing import Optional

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from app.config import settings
from app.utils.errors import (
    AccuracyError,
    DomainError,
    NonConvergenceError,
    ParameterDegeneracyError,
    PoleError,
)

logger = structlog.get_logger()

EPS = np.finfo(float).eps
LOG_PI = math.log(math.pi)
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Stirling coefficients B_2k / (2k (2k - 1)), k = 1..8.
# Regenerate with: [bernoulli(2k) / (2k * (2k - 1)) for k in 1..8].
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
# Below this real part the argument is shifted up before Stirling is applied
_STIRLING_SHIFT = 15.0


class Accuracy(BaseModel):
    """Tolerance contract shared by every numerical routine"""

    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(..., gt=0)
    rel_tol: float = Field(..., gt=0)
    max_terms: int = Field(..., ge=1)

    def allows(self, error: float, value: float) -> bool:
        """True when an error estimate is within the absolute or relative budget"""
        return error <= max(self.abs_tol, self.rel_tol * abs(value))


def default_accuracy(tol: Optional[float] = None) -> Accuracy:
    """Accuracy from settings; a single `tol` overrides both tolerances."""
    return Accuracy(
        abs_tol=tol if tol is not None else settings.ABS_TOL,
        rel_tol=tol if tol is not None else settings.REL_TOL,
        max_terms=settings.MAX_TERMS,
    )


# ---------------------------------------------------------------------------
# log-gamma
# ---------------------------------------------------------------------------

def _nonpositive_integer_mask(z: np.ndarray) -> np.ndarray:
    re = z.real
    return (z.imag == 0) & (re <= 0) & (re == np.round(re))


def _log_gamma_right(z: np.ndarray) -> np.ndarray:
    """log Gamma for Re z >= 1/2: upward shift, then Stirling."""
    shift = np.maximum(0, np.ceil(_STIRLING_SHIFT - z.real)).astype(int)
    w = z + shift
    correction = np.zeros_like(z)
    for k in range(int(shift.max(initial=0))):
        active = k < shift
        correction[active] += np.log(z[active] + k)

    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(z)
    power = inv.copy()
    for c in _STIRLING:
        series += c * power
        power *= inv2
    return (w - 0.5) * np.log(w) - w + HALF_LOG_2PI + series - correction


def _log_sin_pi(z: np.ndarray) -> np.ndarray:
    """Branch of log sin(pi z) analytic in the upper half plane, mirrored below."""
    upper = np.where(z.imag >= 0, z, np.conj(z))
    value = (
        -1j * np.pi * upper
        + 0.5j * np.pi
        - math.log(2.0)
        + np.log1p(-np.exp(2j * np.pi * upper))
    )
    return np.where(z.imag >= 0, value, np.conj(value))


def log_gamma_array(z, poles: str = "raise") -> np.ndarray:
    """
    Vectorised log Gamma on complex input.

    Args:
        z: array-like of complex arguments
        poles: "raise" to reject non-positive integers, "inf" to return +inf there

    Returns:
        complex ndarray; reflection is used for Re z < 1/2
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    bad = _nonpositive_integer_mask(z)
    if bad.any():
        if poles == "raise":
            pole = int(z[bad][0].real)
            raise PoleError(f"Gamma has a pole at z = {pole}", pole=pole)
        z = np.where(bad, 1.0, z)

    out = np.empty_like(z)
    right = z.real >= 0.5
    if right.any():
        out[right] = _log_gamma_right(z[right])
    left = ~right
    if left.any():
        zl = z[left]
        out[left] = LOG_PI - _log_sin_pi(zl) - _log_gamma_right(1.0 - zl)

    if bad.any():
        out[bad] = complex(np.inf, 0.0)
    return out


def log_gamma(z: complex) -> complex:
    """log Gamma(z) on the branch continuous off the negative real axis."""
    return complex(log_gamma_array([z])[0])


def gamma(z: complex) -> complex:
    return cmath.exp(log_gamma(z))


# ---------------------------------------------------------------------------
# Hurwitz zeta
# ---------------------------------------------------------------------------

# Euler-Maclaurin coefficients B_2k / (2k)!, k = 1..6
_EULER_MACLAURIN = (
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
)
# |B_12| / 12! bounds the periodic Bernoulli kernel of the remainder
_EULER_MACLAURIN_REMAINDER = 691.0 / 1307674368000.0
# v is shifted past max(2|s|, this) before the expansion is applied
_HURWITZ_SHIFT = 16.0


def hurwitz_zeta(s: complex, v: float, accuracy: Optional[Accuracy] = None) -> tuple[complex, float]:
    """
    zeta(s, v) = sum_{m >= 0} (v + m)^-s for Re s > 1 and v > 0.

    Terms are summed until v + m >= max(2|s|, 16); the rest is the
    Euler-Maclaurin expansion with six Bernoulli corrections. Returns the
    value and a bound on the dropped remainder.
    """
    acc = accuracy or default_accuracy()
    s = complex(s)
    sigma = s.real
    if not sigma > 1.0:
        raise DomainError(f"Hurwitz zeta needs Re s > 1, got {s}")
    if not v > 0:
        raise DomainError(f"Hurwitz zeta needs v > 0, got {v}")
    shift = max(0, math.ceil(max(2.0 * abs(s), _HURWITZ_SHIFT) - v))
    if shift > acc.max_terms:
        raise NonConvergenceError(f"zeta({s}, {v}) needs {shift} direct terms", max_terms=acc.max_terms)
    head = 0j
    if shift:
        head = complex(np.sum(np.exp(-s * np.log(v + np.arange(shift)))))
    w = v + shift
    log_w = math.log(w)
    value = cmath.exp((1.0 - s) * log_w) / (s - 1.0) + 0.5 * cmath.exp(-s * log_w)
    rising = s
    power = cmath.exp(-(s + 1.0) * log_w)
    for k, c in enumerate(_EULER_MACLAURIN, start=1):
        value += c * rising * power
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= w * w
    # rising is now (s)_13
    K2 = 2 * len(_EULER_MACLAURIN)
    bound = (
        _EULER_MACLAURIN_REMAINDER
        * abs(rising / (s + K2))
        * math.exp((1.0 - sigma - K2) * log_w)
        / (sigma + K2 - 1.0)
    )
    return head + value, bound


# ---------------------------------------------------------------------------
# Bessel J
# ---------------------------------------------------------------------------

def _j_series(alpha: float, x: float, max_terms: int) -> tuple[float, float]:
    half = 0.5 * x
    lead_log = alpha * math.log(half) - log_gamma(alpha + 1.0).real
    q = -half * half
    term = 1.0
    total = 1.0
    biggest = 1.0
    for k in range(1, max_terms):
        term *= q / (k * (k + alpha))
        total += term
        biggest = max(biggest, abs(term))
        if k > half and abs(term) <= EPS * 0.01 * max(abs(total), 1e-300):
            break
    else:
        return math.nan, math.inf
    lead = math.exp(lead_log)
    error = lead * (4.0 * EPS * biggest * math.sqrt(k) + abs(term))
    return lead * total, error


def _j_hankel(nu: float, x: float) -> tuple[float, float]:
    """Hankel expansion; terminates exactly for half-odd-integer orders."""
    mu = 4.0 * nu * nu
    twice = 2.0 * nu
    terminating = twice == round(twice) and round(twice) % 2 == 1
    p, q = 1.0, 0.0
    term = 1.0
    smallest = 1.0
    magnitude = 1.0
    exact = False
    for k in range(1, 200):
        new = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if new == 0.0:
            exact = True
            break
        if abs(new) > abs(term) and not terminating:
            break
        term = new
        smallest = abs(term)
        magnitude += smallest
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p += sign * term
        else:
            q += sign * term
        if smallest < 1e-18 and not terminating:
            break
    chi = x - (0.5 * nu + 0.25) * math.pi
    amp = math.sqrt(2.0 / (math.pi * x))
    value = amp * (p * math.cos(chi) - q * math.sin(chi))
    # phase error grows with x; rounding grows with the summed term sizes
    error = amp * 4.0 * EPS * (magnitude + (abs(p) + abs(q)) * x)
    if not exact:
        error += amp * smallest
    return value, error


def _j_bridge(alpha: float, x: float) -> tuple[float, float]:
    """Hankel at a base order in [-1/2, 1/2), then upward recurrence (stable for order <= x)."""
    steps = int(math.floor(alpha + 0.5))
    nu = alpha - steps
    j0, e0 = _j_hankel(nu, x)
    if steps == 0:
        return j0, e0
    j1, e1 = _j_hankel(nu + 1.0, x)
    for _ in range(steps - 1):
        factor = 2.0 * (nu + 1.0) / x
        j0, j1 = j1, factor * j1 - j0
        e0, e1 = e1, abs(factor) * e1 + e0 + EPS * abs(j1)
        nu += 1.0
    return j1, e1


def bessel_j(alpha: float, x: float, accuracy: Optional[Accuracy] = None) -> float:
    """
    J_alpha(x) for real alpha >= -1/2 and x > 0.

    Power series below the switch point, Hankel asymptotics above
    max(BESSEL_SWITCH_MIN, 2 alpha^2), and Hankel at a low base order plus
    upward recurrence in between. The candidate with the smallest error
    estimate wins; if none meets the tolerance an AccuracyError is raised.
    """
    acc = accuracy or default_accuracy()
    if x <= 0:
        raise DomainError(f"bessel_j needs x > 0, got {x}")
    if alpha < -0.5:
        raise DomainError(f"bessel_j needs alpha >= -1/2, got {alpha}")

    switch = max(settings.BESSEL_SWITCH_MIN, 2.0 * alpha * alpha)
    if x >= switch:
        order = ("hankel", "bridge", "series")
    elif x < settings.BESSEL_SWITCH_MIN:
        order = ("series", "bridge")
    elif alpha <= x:
        order = ("bridge", "series")
    else:
        order = ("series",)

    best = (math.nan, math.inf)
    for regime in order:
        if regime == "hankel":
            value, error = _j_hankel(alpha, x)
        elif regime == "bridge":
            if alpha > x or x < 1.0:
                continue
            value, error = _j_bridge(alpha, x)
        else:
            value, error = _j_series(alpha, x, acc.max_terms)
        if error < best[1]:
            best = (value, error)
        if acc.allows(error, value):
            return value

    logger.warning("bessel_j_refused", alpha=alpha, x=x, error=best[1])
    raise AccuracyError(
        f"J_{alpha}({x}) error estimate {best[1]:.3e} exceeds tolerance",
        alpha=alpha, x=x,
    )


def bessel_h(alpha: float, x: float, accuracy: Optional[Accuracy] = None) -> float:
    """H_alpha(x) = x^(1/2) J_alpha(x)"""
    return math.sqrt(x) * bessel_j(alpha, x, accuracy)


# ---------------------------------------------------------------------------
# Bessel K
# ---------------------------------------------------------------------------

def _k_cutoff(beta: complex, y: float) -> float:
    growth = abs(complex(beta).real)
    cutoff = settings.BESSEL_K_CUTOFF
    # log of the integrand (up to the e^-y factor), measured against its peak
    peak = 0.0
    t = 0.0
    while t < 80.0:
        t += 0.25
        level = -y * (math.cosh(t) - 1.0) + growth * t
        peak = max(peak, level)
        if level < peak - cutoff:
            break
    return t


def bessel_k_array(beta: complex, y, accuracy: Optional[Accuracy] = None) -> np.ndarray:
    """
    K_beta(y) for an array of y > 0 by trapezoid on the cosh integral.

    The step is halved until two refinements agree to rel_tol / 4 at every y.
    """
    acc = accuracy or default_accuracy()
    beta = complex(beta)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise DomainError("bessel_k needs y > 0")
    if beta.real != 0 and beta.imag != 0:
        raise DomainError(f"bessel_k supports real or purely imaginary order, got {beta}")
    if abs(beta.imag) > 1.0 and y.min() < settings.MIN_Y:
        raise AccuracyError(
            f"K_{beta} below y = {settings.MIN_Y} cancels beyond double precision",
            beta=str(beta), y=float(y.min()),
        )

    t_max = _k_cutoff(beta, float(y.min()))
    h = min(0.5, 1.0 / math.sqrt(float(y.max())))
    previous = None
    for _ in range(14):
        t = np.arange(0.0, t_max + h, h)
        weights = np.full(t.shape, h)
        weights[0] = 0.5 * h
        shape = np.exp(-np.outer(y, 2.0 * np.sinh(0.5 * t) ** 2))
        order_part = np.cosh(beta * t)
        terms = shape * (order_part * weights)
        current = terms.sum(axis=1)
        cancellation = (np.abs(terms).sum(axis=1) * 4.0 * EPS)
        if previous is not None:
            gap = np.abs(current - previous)
            scale = np.abs(current)
            if np.all(gap <= np.maximum(0.25 * acc.rel_tol * scale, 1e-300)):
                if np.any(cancellation > np.maximum(acc.rel_tol * scale, acc.abs_tol * np.exp(y))):
                    raise AccuracyError(f"K_{beta} lost precision to cancellation", beta=str(beta))
                return current * np.exp(-y)
        previous = current
        h *= 0.5
    raise NonConvergenceError(f"K_{beta} trapezoid did not settle", beta=str(beta))


def bessel_k(beta: complex, y: float, accuracy: Optional[Accuracy] = None) -> complex:
    """K_beta(y) = integral_0^inf exp(-y cosh t) cosh(beta t) dt"""
    return complex(bessel_k_array(beta, [y], accuracy)[0])


# ---------------------------------------------------------------------------
# Gauss hypergeometric 2F1 on x <= 0
# ---------------------------------------------------------------------------

def _is_nonpositive_integer(c: complex, tol: float = 1e-12) -> bool:
    c = complex(c)
    return abs(c.imag) < tol and c.real < tol and abs(c.real - round(c.real)) < tol


def _hyp2f1_series(a: complex, b: complex, c: complex, z: float, acc: Accuracy) -> complex:
    term = 1.0 + 0.0j
    total = 1.0 + 0.0j
    biggest = 1.0
    quiet = 0
    for k in range(acc.max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        biggest = max(biggest, abs(term))
        if abs(term) <= EPS * 0.01 * abs(total):
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
    else:
        raise NonConvergenceError(f"2F1 series did not converge at z = {z}")
    if biggest * 8.0 * EPS > max(acc.abs_tol, acc.rel_tol * abs(total)):
        raise AccuracyError(f"2F1 series cancellation too severe at z = {z}")
    return total


def hyp2f1(a: complex, b: complex, c: complex, x: float,
           accuracy: Optional[Accuracy] = None) -> complex:
    """
    Gauss 2F1(a, b; c; x) for real x <= 0.

    Direct series for |x| < 1/2; Pfaff transformation x -> x/(x-1) otherwise;
    the 1 - z connection formula once x/(x-1) gets close to 1.
    """
    acc = accuracy or default_accuracy()
    a, b, c = complex(a), complex(b), complex(c)
    if x > 0:
        raise DomainError(f"hyp2f1 is restricted to x <= 0, got {x}")
    if _is_nonpositive_integer(c):
        raise PoleError(f"2F1 undefined for c = {c}", pole=int(round(c.real)))
    if x == 0:
        return 1.0 + 0.0j
    if abs(x) < 0.5:
        return _hyp2f1_series(a, b, c, x, acc)

    # Pfaff: (1 - x)^(-a) 2F1(a, c - b; c; x / (x - 1))
    z = x / (x - 1.0)
    b2 = c - b
    prefactor = cmath.exp(-a * math.log1p(-x))
    if z <= 0.9:
        return prefactor * _hyp2f1_series(a, b2, c, z, acc)

    gap = c - a - b2
    if _is_nonpositive_integer(gap) or _is_nonpositive_integer(-gap):
        raise ParameterDegeneracyError(
            f"connection formula degenerate: c - a - b = {gap} is an integer",
            a=str(a), b=str(b), c=str(c), x=x,
        )
    w = 1.0 - z
    lg = lambda v: log_gamma(v)  # noqa: E731
    first = cmath.exp(lg(c) + lg(gap) - lg(c - a) - lg(c - b2)) * _hyp2f1_series(a, b2, 1.0 - gap, w, acc)
    second = (
        cmath.exp(gap * math.log(w) + lg(c) + lg(-gap) - lg(a) - lg(b2))
        * _hyp2f1_series(c - a, c - b2, 1.0 + gap, w, acc)
    )
    return prefactor * (first + second)
