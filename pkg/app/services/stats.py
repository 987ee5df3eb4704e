"""
Prime sums behind the Selberg conjectures.

Every series is a cumulative sum over primes evaluated at checkpoints; the
estimator fits the Selberg sum against log log x on [sqrt(X), X].
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from app.services.lfunc import SelbergFunction, product
from app.services.primes import prime_table
from app.utils.errors import DegenerateFitError, DomainError, RealizationError

logger = structlog.get_logger()

MIN_FIT_POINTS = 4
MIN_ESTIMATE_X = 1000


@dataclass(frozen=True)
class StatSeries:
    kind: str
    checkpoints: np.ndarray
    partial_sums: np.ndarray

    def rows(self) -> List[Tuple[float, float, float, float]]:
        """(x, re, im, log log x); log log x is nan for x <= e"""
        out = []
        for x, value in zip(self.checkpoints, self.partial_sums):
            loglog = math.log(math.log(x)) if x > math.e else float("nan")
            out.append((float(x), float(value.real), float(value.imag), loglog))
        return out


def geometric_checkpoints(X: float, ratio: float = 2.0, start: Optional[float] = None) -> np.ndarray:
    """start, start*ratio, ... below X, then X itself; start defaults to sqrt(X)"""
    if ratio <= 1.0:
        raise DomainError(f"checkpoint ratio must exceed 1, got {ratio}")
    x = math.sqrt(X) if start is None else start
    points = []
    while x < X * (1 - 1e-12):
        points.append(x)
        x *= ratio
    points.append(float(X))
    return np.asarray(points, dtype=float)


def _check_checkpoints(functions: Sequence[SelbergFunction], checkpoints) -> np.ndarray:
    xs = np.sort(np.asarray(checkpoints, dtype=float))
    top = xs[-1] if xs.size else 0.0
    for F in functions:
        if top > F.N:
            raise RealizationError(
                f"checkpoint {top:g} exceeds the realization of {F.name} (N = {F.N})",
                function=F.name,
            )
    return xs


def _cumulative(kind: str, xs: np.ndarray, primes: np.ndarray, terms: np.ndarray) -> StatSeries:
    running = np.concatenate(([0j], np.cumsum(terms)))
    idx = np.searchsorted(primes, xs, side="right")
    return StatSeries(kind=kind, checkpoints=xs, partial_sums=running[idx])


def _primes_upto(xs: np.ndarray) -> np.ndarray:
    top = int(xs[-1]) if xs.size else 0
    return prime_table(max(top, 2)).upto(top)


def selberg_sum(F: SelbergFunction, checkpoints) -> StatSeries:
    """sum_{p <= x} |a_p|^2 / p"""
    xs = _check_checkpoints([F], checkpoints)
    p = _primes_upto(xs)
    terms = np.abs(F.coefficients[p - 1]) ** 2 / p
    return _cumulative("selberg", xs, p, terms.astype(complex))


def orthogonality_sum(F: SelbergFunction, G: SelbergFunction, checkpoints) -> StatSeries:
    """sum_{p <= x} a_p(F) conj(a_p(G)) / p"""
    xs = _check_checkpoints([F, G], checkpoints)
    p = _primes_upto(xs)
    terms = F.coefficients[p - 1] * np.conj(G.coefficients[p - 1]) / p
    return _cumulative("orthogonality", xs, p, terms)


def pole_divergence_sum(F: SelbergFunction, alpha: float, checkpoints) -> StatSeries:
    """sum_{p <= x} a_p / p^(1 + i alpha)"""
    xs = _check_checkpoints([F], checkpoints)
    p = _primes_upto(xs)
    terms = F.coefficients[p - 1] * np.exp(-(1.0 + 1j * alpha) * np.log(p))
    return _cumulative("pole_divergence", xs, p, terms)


@dataclass
class NFEstimate:
    slope: float
    intercept: float
    nearest_integer: int
    distance: float
    residual_rms: float
    series: StatSeries


def estimate_nF(F: SelbergFunction, X: float, checkpoint_count: Optional[int] = None) -> NFEstimate:
    """
    Least-squares slope of the Selberg sum against log log x.

    Checkpoints are geometric (ratio 2 unless a count is given) on [sqrt(X), X].
    """
    if X < MIN_ESTIMATE_X:
        raise DomainError(f"X must be at least {MIN_ESTIMATE_X}, got {X:g}")
    if checkpoint_count is None:
        xs = geometric_checkpoints(X)
    else:
        xs = np.geomspace(math.sqrt(X), X, checkpoint_count)
    if len(xs) < MIN_FIT_POINTS:
        raise DegenerateFitError(
            f"{len(xs)} checkpoints; the fit needs at least {MIN_FIT_POINTS}"
        )
    series = selberg_sum(F, xs)
    t = np.log(np.log(xs))
    y = series.partial_sums.real
    slope, intercept = np.polyfit(t, y, 1)
    residual = y - (slope * t + intercept)
    nearest = int(round(slope))
    estimate = NFEstimate(
        slope=float(slope),
        intercept=float(intercept),
        nearest_integer=nearest,
        distance=float(abs(slope - nearest)),
        residual_rms=float(np.sqrt(np.mean(residual ** 2))),
        series=series,
    )
    logger.info(
        "nf_estimated",
        function=F.name,
        X=X,
        slope=estimate.slope,
        nearest=nearest,
        checkpoints=len(xs),
    )
    return estimate


@dataclass
class AdditivityReport:
    target: int
    estimate: NFEstimate
    coefficient_max_error: float
    coefficient_identity_holds: bool

    @property
    def distance(self) -> float:
        return abs(self.estimate.slope - self.target)


def nF_additivity_check(factors: Sequence[Tuple[SelbergFunction, int]], X: float,
                        tol: float = 1e-9) -> AdditivityReport:
    """
    n_F of prod F_i^(e_i) against sum e_i^2, with a_p(F) = sum e_i a_p(F_i)
    checked at every prime <= X.
    """
    if not factors:
        raise DomainError("need at least one factor")
    expanded: List[SelbergFunction] = []
    for F, e in factors:
        if e < 1:
            raise DomainError(f"exponent of {F.name} must be a positive integer, got {e}")
        expanded.extend([F] * e)
    for F in expanded:
        if X > F.N:
            raise RealizationError(f"{F.name} realized to {F.N}, below X = {X:g}")

    total = expanded[0]
    for F in expanded[1:]:
        total = product(total, F)

    p = prime_table(int(X)).upto(X)
    expected = sum(e * F.coefficients[p - 1] for F, e in factors)
    error = float(np.max(np.abs(total.coefficients[p - 1] - expected))) if p.size else 0.0
    target = sum(e * e for _, e in factors)
    report = AdditivityReport(
        target=target,
        estimate=estimate_nF(total, X),
        coefficient_max_error=error,
        coefficient_identity_holds=error <= tol,
    )
    logger.info(
        "nf_additivity",
        function=total.name,
        target=target,
        slope=report.estimate.slope,
        coefficient_error=error,
    )
    return report
