"""
Degree gate: why 0 < d < 1 and d = 0 leave only F = 1.

Two mechanisms are measured here. For 0 < d < 1 the coefficients
gamma(n+1) F(n+1) / (gamma(-n) n!) of the auxiliary series K(x) decay like
n^((d-1) n) A^n, so K is entire. For d = 0 the Euler factors are
polynomials P(x) = prod (1 - R_i x) whose largest |R_i| forces theta >= 1/2.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from app.config import settings
from app.services.lfunc import (
    GammaFactor,
    SelbergFunction,
    degree,
    dirichlet_eval,
    local_factor_from_coefficients,
)
from app.services.primes import factorize, prime_table
from app.services.specfun import default_accuracy, log_gamma_array
from app.utils.errors import (
    DomainError,
    InsufficientDataError,
    LabError,
    NonConvergenceError,
)

logger = structlog.get_logger()

MIN_PROFILE_POINTS = 20
ROOT_TOL = 1e-10
TIE_TOL = 1e-9
# F(n+1) only enters through log|F|; a loose tolerance is plenty
PROFILE_F_TOL = 1e-6


# ---------------------------------------------------------------------------
# K(x) coefficient decay
# ---------------------------------------------------------------------------

@dataclass
class DecayProfile:
    n: np.ndarray
    log_ratio: np.ndarray
    excluded: Dict[int, str] = field(default_factory=dict)
    exponent: Optional[float] = None

    def rows(self) -> List[Tuple[int, float]]:
        return [(int(k), float(v)) for k, v in zip(self.n, self.log_ratio)]


def gamma_family(d: float, Q: float = 1.0, mu: float = 0.25) -> GammaFactor:
    """
    Single-factor Gamma(d s / 2 + mu) of degree d. With mu = 0 and d even
    every -n is a pole, so the default shift sits off the half-integers.
    """
    if not d > 0:
        raise DomainError(f"synthetic degree must be positive, got {d}")
    return GammaFactor(1.0, Q, ((d / 2.0, mu),))


def _f_log_values(F: Union[SelbergFunction, Callable[[int], complex], None],
                  n: np.ndarray, excluded: Dict[int, str]) -> np.ndarray:
    out = np.zeros(len(n))
    if F is None:
        return out
    acc = default_accuracy(PROFILE_F_TOL)
    for i, k in enumerate(n):
        s = int(k) + 1
        try:
            value = dirichlet_eval(F, s, acc).value if isinstance(F, SelbergFunction) else F(s)
        except LabError as e:
            excluded[int(k)] = f"F({s}) not evaluable: {e.code}"
            out[i] = np.nan
            continue
        out[i] = math.log(abs(value)) if value != 0 else -np.inf
    return out


def k_decay_profile(gamma: GammaFactor,
                    F: Union[SelbergFunction, Callable[[int], complex], None] = None,
                    N: int = 200) -> DecayProfile:
    """
    log |gamma(n+1) F(n+1) / (gamma(-n) n!)| for n = 0..N.

    F defaults to the constant 1. A pole of gamma at -n gives -inf (the
    coefficient vanishes) and the entry is excluded from fits.
    """
    if N < 0:
        raise DomainError(f"N must be non-negative, got {N}")
    n = np.arange(N + 1)
    excluded: Dict[int, str] = {}
    top = gamma.log_value(n + 1.0).real
    bottom = gamma.log_value(-n.astype(float), poles="inf").real
    factorial = log_gamma_array(n + 1.0).real
    log_ratio = top - bottom - factorial + _f_log_values(F, n, excluded)
    for k in n[np.isinf(bottom)]:
        excluded[int(k)] = "gamma has a pole at -n"
        log_ratio[k] = -np.inf
    if excluded:
        logger.debug("decay_profile_excluded", count=len(excluded))
    profile = DecayProfile(n=n, log_ratio=log_ratio, excluded=excluded)
    try:
        profile.exponent = decay_exponent(profile)
    except InsufficientDataError:
        profile.exponent = None
    return profile


def decay_exponent(profile: DecayProfile) -> float:
    """
    Coefficient of n log n in a least-squares fit of log|ratio| by
    n log n, n and 1 over the largest third of the finite entries.
    The n term carries the A^n factor; the result approximates d - 1.
    """
    finite = np.isfinite(profile.log_ratio) & (profile.n >= 2)
    n = profile.n[finite].astype(float)
    y = profile.log_ratio[finite]
    if len(n) < MIN_PROFILE_POINTS:
        raise InsufficientDataError(
            f"{len(n)} finite profile entries; need {MIN_PROFILE_POINTS}"
        )
    tail = slice(len(n) - max(len(n) // 3, 3), None)
    n, y = n[tail], y[tail]
    design = np.column_stack([n * np.log(n), n, np.ones_like(n)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0])


# ---------------------------------------------------------------------------
# Degree-0 Euler factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalFactor:
    """P(x) = sum A_j x^j = prod (1 - R_i x)"""

    p: Optional[int]
    coeffs: Tuple[complex, ...]
    roots: Tuple[complex, ...]

    @property
    def max_modulus(self) -> float:
        return max((abs(r) for r in self.roots), default=0.0)

    @property
    def dominant(self) -> bool:
        """A single root of largest modulus (up to TIE_TOL)."""
        mods = sorted((abs(r) for r in self.roots), reverse=True)
        return len(mods) < 2 or mods[0] - mods[1] > TIE_TOL


def _durand_kerner(monic: np.ndarray, start: np.ndarray) -> Tuple[np.ndarray, bool]:
    z = start.copy()
    r = len(z)
    for _ in range(settings.ROOT_MAX_ITER):
        values = np.polyval(monic, z)
        diff = z[:, None] - z[None, :]
        diff[np.arange(r), np.arange(r)] = 1.0
        denom = diff.prod(axis=1)
        if np.any(denom == 0):
            return z, False
        delta = values / denom
        z = z - delta
        if np.max(np.abs(delta)) <= 1e-15 * max(1.0, np.max(np.abs(z))):
            return z, True
    return z, False


def _reconstruct(roots: np.ndarray) -> np.ndarray:
    # np.poly gives prod (x - R_i) highest first, i.e. A_0..A_r of prod (1 - R_i x)
    return np.poly(roots) if len(roots) else np.ones(1, dtype=complex)


def local_roots(coeffs: Sequence[complex], p: Optional[int] = None) -> LocalFactor:
    """
    Inverse roots of P(x) = A_0 + A_1 x + ... + A_r x^r, A_0 = 1, by
    Weierstrass-Durand-Kerner iteration on x^r P(1/x), restarted from
    seeded random perturbations until the product reproduces P.
    """
    A = np.asarray(coeffs, dtype=complex)
    while len(A) > 1 and A[-1] == 0:
        A = A[:-1]
    if len(A) < 2:
        raise DomainError("local polynomial must have degree >= 1")
    if abs(A[0] - 1.0) > 1e-12:
        raise DomainError(f"A_0 must be 1, got {A[0]}")
    r = len(A) - 1
    radius = 1.0 + float(np.max(np.abs(A[1:])))
    start = radius * (0.4 + 0.9j) ** np.arange(r)
    rng = np.random.default_rng(settings.ROOT_SEED)
    scale = max(1.0, float(np.max(np.abs(A))))

    for attempt in range(settings.ROOT_RESTARTS + 1):
        z, converged = _durand_kerner(A, start)
        error = float(np.max(np.abs(_reconstruct(z) - A)))
        if error <= ROOT_TOL * scale:
            if attempt:
                logger.debug("roots_restarted", attempts=attempt, degree=r)
            return LocalFactor(p=p, coeffs=tuple(A), roots=tuple(z))
        start = z + radius * 0.1 * (rng.standard_normal(r) + 1j * rng.standard_normal(r))
    raise NonConvergenceError(
        f"root iteration for a degree-{r} polynomial failed after "
        f"{settings.ROOT_RESTARTS} restarts (coefficient error {error:.3e})",
        degree=r,
    )


@dataclass
class BjGrowth:
    j: np.ndarray
    values: np.ndarray
    limsup: float
    max_modulus: float
    dominant: bool

    def rows(self) -> List[Tuple[int, float]]:
        return [(int(k), float(v)) for k, v in zip(self.j, self.values)]


def bj_values(factor: LocalFactor, J: int) -> np.ndarray:
    """B_j = -sum R_i^j / j for j = 1..J (log P = sum B_j x^j)"""
    R = np.asarray(factor.roots, dtype=complex)
    j = np.arange(1, J + 1)
    return -(R[None, :] ** j[:, None]).sum(axis=1) / j


def bj_growth(factor: LocalFactor, J: int) -> BjGrowth:
    """
    |B_j|^(1/j), j = 1..J, evaluated in log space.

    The limsup over the last tenth is taken of |j B_j|^(1/j): j^(1/j) -> 1
    leaves the limit alone and drops the slow 1/j bias of the finite window.
    """
    if J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    R = np.asarray(factor.roots, dtype=complex)
    j = np.arange(1, J + 1)
    M = factor.max_modulus
    if M == 0.0:
        values = np.zeros(J)
        sums = np.zeros(J)
    else:
        scaled = np.abs(((R / M)[None, :] ** j[:, None]).sum(axis=1))
        with np.errstate(divide="ignore"):
            log_sum = j * math.log(M) + np.log(scaled)
        values = np.exp((log_sum - np.log(j)) / j)
        sums = np.exp(log_sum / j)
    window = sums[-max(1, J // 10):]
    return BjGrowth(
        j=j,
        values=values,
        limsup=float(window.max()),
        max_modulus=M,
        dominant=factor.dominant,
    )


@dataclass
class ThetaVerdict:
    p: int
    theta: float
    admissible: bool


def theta_requirement(factor: LocalFactor) -> ThetaVerdict:
    """
    theta forced by |b_(p^j)| = |B_j|: log_p max |R_i|.

    Admissible only when max |R_i|^2 < p by more than TIE_TOL relative, so a
    root on |R| = sqrt(p) (theta = 1/2 up to rounding) is rejected.
    """
    if factor.p is None or factor.p < 2:
        raise DomainError("theta needs the prime of the local factor")
    M = factor.max_modulus
    theta = math.log(M) / math.log(factor.p) if M > 0 else -math.inf
    return ThetaVerdict(p=factor.p, theta=theta, admissible=M * M < factor.p * (1.0 - TIE_TOL))


@dataclass
class DegreeZeroReport:
    Q: float
    q_squared: int
    q_squared_integral: bool
    epsilon: Optional[complex]
    support_violations: List[int]
    matching_violations: List[int]
    leading_modulus_ok: bool
    verdicts: List[ThetaVerdict]

    @property
    def consistent(self) -> bool:
        return (
            self.q_squared_integral
            and self.leading_modulus_ok
            and not self.support_violations
            and not self.matching_violations
        )

    @property
    def admissible(self) -> bool:
        return self.consistent and all(v.admissible for v in self.verdicts)


def degree_zero_constraints(Q: float, coeffs: Mapping[int, complex],
                            epsilon: Optional[complex] = None,
                            tol: float = 1e-9) -> DegreeZeroReport:
    """
    Term-by-term matching of sum a_n (Q^2/n)^s = eps Q sum (conj a_n / n) n^s.

    Frequencies force Q^2 integral and n | Q^2 on the support; the n = 1
    term gives a_(Q^2) = eps Q. Each prime power p^r || Q^2 then carries a
    local polynomial with prod |R_i| = |a_(p^r)| >= p^(r/2).
    """
    support = {n: complex(a) for n, a in coeffs.items() if abs(a) > tol}
    q2_float = Q * Q
    q2 = int(round(q2_float))
    integral = q2 >= 1 and abs(q2_float - q2) <= tol * max(1.0, q2_float)
    support_violations = sorted(n for n in support if n < 1 or not integral or q2 % n)

    leading = support.get(q2, 0j) if integral else 0j
    leading_ok = integral and abs(abs(leading) - Q) <= tol * max(1.0, Q)
    if epsilon is None and leading_ok:
        epsilon = leading / Q

    matching: List[int] = []
    if integral and epsilon is not None:
        for n in range(1, q2 + 1):
            if q2 % n:
                continue
            lhs = support.get(q2 // n, 0j)
            rhs = epsilon * Q * support.get(n, 0j).conjugate() / n
            if abs(lhs - rhs) > tol * max(1.0, abs(rhs)):
                matching.append(n)

    verdicts: List[ThetaVerdict] = []
    if integral and q2 > 1 and not support_violations:
        for p, r in sorted(factorize(q2).items()):
            local = [support.get(p ** k, 0j) if k else 1.0 for k in range(r + 1)]
            if abs(local[-1]) == 0:
                continue
            verdicts.append(theta_requirement(local_roots(local, p)))

    report = DegreeZeroReport(
        Q=Q,
        q_squared=q2,
        q_squared_integral=integral,
        epsilon=epsilon,
        support_violations=support_violations,
        matching_violations=matching,
        leading_modulus_ok=leading_ok,
        verdicts=verdicts,
    )
    logger.info(
        "degree_zero_checked",
        q_squared=q2,
        consistent=report.consistent,
        admissible=report.admissible,
    )
    return report


@dataclass
class QBoundReport:
    Q: float
    bound: float
    status: str


def q_lower_bound_probe(gamma: GammaFactor, tol: float = 1e-9) -> QBoundReport:
    """Compare Q of a degree-1 gamma factor with pi^(-1/2); diagnostic only."""
    d = degree(gamma)
    if abs(d - 1.0) > 1e-12:
        raise DomainError(f"the Q bound applies to degree 1, got {d}")
    bound = math.pi ** -0.5
    if abs(gamma.Q - bound) <= tol * bound:
        status = "boundary"
    elif gamma.Q < bound:
        status = "below"
    else:
        status = "above"
    return QBoundReport(Q=gamma.Q, bound=bound, status=status)


# ---------------------------------------------------------------------------
# Aggregate
# ---------------------------------------------------------------------------

@dataclass
class DegreeGateReport:
    name: str
    degree: Optional[float]
    decay: Optional[DecayProfile]
    verdicts: List[ThetaVerdict]
    unverifiable: List[int]
    q_bound: Optional[QBoundReport]
    growth: Dict[int, BjGrowth] = field(default_factory=dict)

    def growth_rows(self) -> List[Tuple[int, int, float]]:
        """(p, j, |B_j|^(1/j)) for every verified prime"""
        return [(p, j, v) for p, g in sorted(self.growth.items()) for j, v in g.rows()]

    @property
    def theta_admissible(self) -> bool:
        return all(v.admissible for v in self.verdicts)


def degree_gate_report(F: SelbergFunction, prime_limit: int = 50, profile_terms: int = 200,
                       growth_terms: int = 100) -> DegreeGateReport:
    """
    Decay profile of the gamma factor plus theta verdicts and B_j growth
    for the Euler factors at primes up to `prime_limit`.
    """
    d = F.degree
    decay = k_decay_profile(F.gamma, None, profile_terms) if F.gamma is not None and d > 0 else None
    verdicts: List[ThetaVerdict] = []
    unverifiable: List[int] = []
    growth: Dict[int, BjGrowth] = {}
    for p in prime_table(max(prime_limit, 2)).upto(prime_limit):
        p = int(p)
        local = F.source.local_factor(p)
        if local is not None and not any(abs(c) > 0 for c in local.coeffs[1:]):
            continue
        try:
            if local is None:
                local = local_factor_from_coefficients(F, p)
            factor = local_roots(local.coeffs, p)
            verdicts.append(theta_requirement(factor))
            growth[p] = bj_growth(factor, growth_terms)
        except LabError as e:
            logger.debug("local_factor_skipped", function=F.name, prime=p, reason=str(e))
            unverifiable.append(p)
    q_bound = q_lower_bound_probe(F.gamma) if d is not None and abs(d - 1.0) < 1e-12 else None
    return DegreeGateReport(
        name=F.name,
        degree=d,
        decay=decay,
        verdicts=verdicts,
        unverifiable=unverifiable,
        q_bound=q_bound,
        growth=growth,
    )
