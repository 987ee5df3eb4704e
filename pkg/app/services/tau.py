"""
Ramanujan tau(n) from the q-expansion of q * prod (1 - q^n)^24.

prod (1 - q^n)^3 = sum_k (-1)^k (2k + 1) q^(k(k+1)/2) (Jacobi), and the 24th
power is that series raised to the 8th: three number-theoretic-transform
squarings modulo each of five primes, recombined exactly by Garner's algorithm.
"""
from functools import lru_cache
from typing import List

import numpy as np
import structlog
from numba import njit

from app.services.primes import factorize
from app.utils.errors import CannotCertifyError

logger = structlog.get_logger()

# NTT-friendly primes below 2^30; each has 2^21 | p - 1
NTT_PRIMES = (998244353, 469762049, 167772161, 754974721, 1004535809)
MAX_LOG_LENGTH = 21
# 2N - 1 coefficients of a square must fit in one transform
MAX_TAU_INDEX = 2 ** (MAX_LOG_LENGTH - 1)


def primitive_root(p: int) -> int:
    """Smallest generator of (Z/p)* for prime p"""
    factors = list(factorize(p - 1))
    g = 2
    while any(pow(g, (p - 1) // r, p) == 1 for r in factors):
        g += 1
    return g


@njit(cache=True)
def _power_mod(base, exponent, mod):
    result = 1
    base %= mod
    while exponent > 0:
        if exponent & 1:
            result = result * base % mod
        base = base * base % mod
        exponent >>= 1
    return result


@njit(cache=True)
def _ntt(a, invert, mod, root):
    n = a.shape[0]
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j ^= bit
        if i < j:
            a[i], a[j] = a[j], a[i]
    length = 2
    while length <= n:
        w_len = _power_mod(root, (mod - 1) // length, mod)
        if invert:
            w_len = _power_mod(w_len, mod - 2, mod)
        half = length >> 1
        twiddle = np.empty(half, dtype=np.int64)
        twiddle[0] = 1
        for k in range(1, half):
            twiddle[k] = twiddle[k - 1] * w_len % mod
        for start in range(0, n, length):
            for k in range(half):
                u = a[start + k]
                v = a[start + k + half] * twiddle[k] % mod
                a[start + k] = u + v if u + v < mod else u + v - mod
                a[start + k + half] = u - v if u >= v else u - v + mod
        length <<= 1
    if invert:
        n_inv = _power_mod(n, mod - 2, mod)
        for i in range(n):
            a[i] = a[i] * n_inv % mod


@njit(cache=True)
def _square_truncated(coeffs, length, mod, root):
    a = np.zeros(length, dtype=np.int64)
    n = coeffs.shape[0]
    a[:n] = coeffs
    _ntt(a, False, mod, root)
    for i in range(length):
        a[i] = a[i] * a[i] % mod
    _ntt(a, True, mod, root)
    return a[:n].copy()


def _cube_series(n_terms: int) -> np.ndarray:
    """Signed coefficients of prod (1 - q^n)^3 below q^n_terms"""
    series = np.zeros(n_terms, dtype=np.int64)
    k = 0
    while k * (k + 1) // 2 < n_terms:
        series[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    return series


def _residues(N: int) -> np.ndarray:
    """tau(1..N) modulo each NTT prime, shape (len(NTT_PRIMES), N)"""
    if N > MAX_TAU_INDEX:
        raise CannotCertifyError(
            f"tau beyond n = {MAX_TAU_INDEX} needs a longer transform", requested=N
        )
    length = 1
    while length < 2 * N - 1:
        length <<= 1
    cube = _cube_series(N)
    out = np.empty((len(NTT_PRIMES), N), dtype=np.int64)
    for row, p in enumerate(NTT_PRIMES):
        g = primitive_root(p)
        series = cube % p
        for _ in range(3):
            series = _square_truncated(series, length, p, g)
        out[row] = series
    return out


@njit(cache=True)
def _garner_digits(residues, moduli):
    """Mixed-radix digits v with x = v0 + v1 m0 + v2 m0 m1 + ..."""
    k, n = residues.shape
    inverse = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for j in range(i):
            inverse[i, j] = _power_mod(moduli[j] % moduli[i], moduli[i] - 2, moduli[i])
    digits = np.empty((k, n), dtype=np.int64)
    for col in range(n):
        for i in range(k):
            value = residues[i, col]
            for j in range(i):
                value = (value - digits[j, col]) % moduli[i]
                value = value * inverse[i, j] % moduli[i]
            digits[i, col] = value
    return digits


def _digits(N: int) -> np.ndarray:
    moduli = np.asarray(NTT_PRIMES, dtype=np.int64)
    return _garner_digits(_residues(N), moduli)


@lru_cache(maxsize=24)
def tau_normalized(N: int) -> np.ndarray:
    """
    tau(n) / n^(11/2) for n = 1..N as float64.

    Negative values are assembled from complement digits so the float
    sum never cancels.
    """
    digits = _digits(N).astype(np.float64)
    moduli = np.asarray(NTT_PRIMES, dtype=np.float64)
    top = NTT_PRIMES[-1]
    negative = digits[-1] >= (top + 1) // 2
    place = np.cumprod(np.concatenate(([1.0], moduli[:-1])))
    positive_part = (digits * place[:, None]).sum(axis=0)
    complement = ((moduli[:, None] - 1.0 - digits) * place[:, None]).sum(axis=0) + 1.0
    magnitude = np.where(negative, complement, positive_part)
    n = np.arange(1, N + 1, dtype=np.float64)
    values = np.where(negative, -1.0, 1.0) * magnitude / n ** 5.5
    values.setflags(write=False)
    logger.info("tau_realized", terms=N)
    return values


def tau_exact(N: int) -> List[int]:
    """Exact tau(1..N) as Python integers (same transform, integer recombination)."""
    digits = _digits(N)
    M = 1
    for p in NTT_PRIMES:
        M *= p
    out = []
    for col in range(N):
        value = 0
        place = 1
        for row, p in enumerate(NTT_PRIMES):
            value += int(digits[row, col]) * place
            place *= p
        out.append(value - M if value > M // 2 else value)
    return out


def tau_reference(N: int) -> List[int]:
    """Slow direct expansion of q prod (1 - q^n)^24; independent of the transform."""
    series = [0] * N
    series[0] = 1
    for n in range(1, N):
        # multiply by (1 - q^n) twenty-four times
        for _ in range(24):
            for i in range(N - 1, n - 1, -1):
                series[i] -= series[i - n]
    return series
