import math

import numpy as np
import pytest

from app.services.primes import (
    divisor_counts,
    divisors,
    euler_phi,
    factorize,
    is_prime,
    prime_table,
    sieve_eratosthenes,
    sieve_linear,
    smallest_prime_factors,
    verify_prime_table,
)
from app.services.tau import tau_exact, tau_normalized, tau_reference
from app.utils.errors import DomainError


class TestSieves:
    """Tests for the two prime sieves"""

    def test_counts(self):
        assert len(sieve_eratosthenes(100)) == 25
        assert len(sieve_eratosthenes(1_000_000)) == 78498

    def test_sieves_agree(self):
        assert np.array_equal(sieve_eratosthenes(50_000), sieve_linear(50_000))

    def test_small_limits(self):
        assert len(sieve_eratosthenes(1)) == 0
        assert list(sieve_linear(2)) == [2]

    def test_prime_table(self):
        table = prime_table(1000)
        assert table.count(100) == 25
        assert list(table.upto(12)) == [2, 3, 5, 7, 11]
        assert verify_prime_table(table)

    def test_smallest_prime_factors(self):
        spf = smallest_prime_factors(100)
        assert spf[91] == 7
        assert spf[97] == 97
        assert spf[64] == 2


class TestArithmetic:
    """Tests for the small arithmetic helpers"""

    def test_factorize(self):
        assert factorize(360) == {2: 3, 3: 2, 5: 1}
        assert factorize(1) == {}

    def test_factorize_rejects_zero(self):
        with pytest.raises(DomainError):
            factorize(0)

    def test_divisors_and_phi(self):
        assert divisors(12) == [1, 2, 3, 4, 6, 12]
        assert euler_phi(36) == 12
        assert is_prime(97) and not is_prime(91)

    def test_divisor_counts(self):
        d = divisor_counts(720)
        assert d[12] == 6
        assert d[720] == 30


class TestTau:
    """Tests for Ramanujan tau"""

    def test_first_values(self):
        assert tau_exact(10) == [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]

    def test_matches_reference_expansion(self):
        assert tau_exact(200) == tau_reference(200)

    def test_multiplicative(self):
        """Test tau(mn) = tau(m) tau(n) for coprime mn <= 1000"""
        tau = tau_exact(1000)
        for m in range(2, 1000):
            for n in range(m + 1, 1000 // m + 1):
                if math.gcd(m, n) == 1:
                    assert tau[m * n - 1] == tau[m - 1] * tau[n - 1]

    def test_hecke_relation(self):
        """Test tau(p^2) = tau(p)^2 - p^11"""
        tau = tau_exact(200)
        for p in (2, 3, 5, 7, 11, 13):
            assert tau[p * p - 1] == tau[p - 1] ** 2 - p ** 11

    def test_normalized(self):
        """Test the normalized values against exact integers and Deligne's bound"""
        N = 5000
        exact = np.array(tau_exact(N), dtype=float)
        n = np.arange(1, N + 1, dtype=float)
        normalized = tau_normalized(N)
        assert np.allclose(normalized * n ** 5.5, exact, rtol=1e-12)
        assert np.all(np.abs(normalized) <= divisor_counts(N)[1:] + 1e-9)

    def test_normalized_is_read_only(self):
        with pytest.raises(ValueError):
            tau_normalized(16)[0] = 2.0
