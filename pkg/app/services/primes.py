from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List

import numpy as np
import structlog
from numba import njit

from app.utils.errors import DomainError

logger = structlog.get_logger()


@dataclass(frozen=True)
class PrimeTable:
    """All primes <= limit, ascending"""

    limit: int
    primes: np.ndarray

    def upto(self, x: float) -> np.ndarray:
        return self.primes[: int(np.searchsorted(self.primes, x, side="right"))]

    def count(self, x: float) -> int:
        return int(np.searchsorted(self.primes, x, side="right"))


def sieve_eratosthenes(limit: int) -> np.ndarray:
    """Odd-only boolean sieve."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    is_prime[4::2] = False
    for p in range(3, int(limit ** 0.5) + 1, 2):
        if is_prime[p]:
            is_prime[p * p :: 2 * p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


@njit(cache=True)
def _linear_sieve(limit):
    spf = np.zeros(limit + 1, dtype=np.int64)
    primes = np.empty(limit + 1, dtype=np.int64)
    count = 0
    for i in range(2, limit + 1):
        if spf[i] == 0:
            spf[i] = i
            primes[count] = i
            count += 1
        for j in range(count):
            p = primes[j]
            if p > spf[i] or i * p > limit:
                break
            spf[i * p] = p
    return primes[:count], spf


def sieve_linear(limit: int) -> np.ndarray:
    """Linear (Euler) sieve; every composite is struck exactly once."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    primes, _ = _linear_sieve(limit)
    return primes


def smallest_prime_factors(limit: int) -> np.ndarray:
    """spf[n] for 0 <= n <= limit (0 for n < 2)"""
    _, spf = _linear_sieve(max(limit, 2))
    return spf[: limit + 1]


@lru_cache(maxsize=8)
def prime_table(limit: int) -> PrimeTable:
    """Primes up to `limit`, spot-checked against a second sieve."""
    primes = sieve_eratosthenes(limit)
    checkpoint = min(limit, 10_000)
    other = sieve_linear(checkpoint)
    head = primes[: len(other)]
    if len(head) != len(other) or not np.array_equal(head, other):
        raise RuntimeError(f"sieves disagree below {checkpoint}")
    primes.setflags(write=False)
    logger.debug("sieve_built", limit=limit, count=len(primes))
    return PrimeTable(limit=limit, primes=primes)


def verify_prime_table(table: PrimeTable) -> bool:
    """Full cross-check of the table against the linear sieve."""
    return bool(np.array_equal(table.primes, sieve_linear(table.limit)))


def factorize(n: int) -> Dict[int, int]:
    """Trial division; fine for the moduli used here."""
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    factors: Dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def divisors(n: int) -> List[int]:
    result = [1]
    for p, e in factorize(n).items():
        result = [d * p ** k for d in result for k in range(e + 1)]
    return sorted(result)


def euler_phi(n: int) -> int:
    result = n
    for p in factorize(n):
        result -= result // p
    return result


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == {n: 1}


def divisor_counts(limit: int) -> np.ndarray:
    """d(n) for 0 <= n <= limit by additive sieve (d(0) = 0)."""
    counts = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        counts[d::d] += 1
    return counts
