"""
Dirichlet characters mod q.

A character is stored as an exponent table: values[n] = exp(2 pi i e[n] / E)
where E is the exponent of (Z/q)* and e[n] = -1 marks gcd(n, q) > 1.
Equality and multiplicativity are decided on exponents, never on floats.
"""
import cmath
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import structlog

from app.services.primes import divisors, factorize
from app.utils.errors import (
    InsufficientDataError,
    InvalidModulusError,
    NonPrimitiveCharacterError,
    NoSuchCharacterError,
)

logger = structlog.get_logger()


@dataclass(frozen=True)
class _UnitGroup:
    """Cyclic decomposition of (Z/q)*: generators lifted by CRT, their orders."""

    modulus: int
    generators: Tuple[int, ...]
    orders: Tuple[int, ...]
    exponent: int
    logs: Dict[int, Tuple[int, ...]] = field(repr=False)


def _primitive_root_mod_prime_power(p: int, e: int) -> int:
    pe = p ** e
    phi = pe - pe // p
    prime_factors = list(factorize(phi))
    for g in range(2, pe):
        if g % p == 0:
            continue
        if all(pow(g, phi // r, pe) != 1 for r in prime_factors):
            return g
    raise NoSuchCharacterError(f"no primitive root mod {pe}")


def _crt_lift(residue: int, part: int, modulus: int) -> int:
    """The unit that is `residue` mod `part` and 1 mod modulus/part."""
    rest = modulus // part
    if rest == 1:
        return residue % modulus
    # x = 1 + rest * k, x = residue (mod part)
    k = ((residue - 1) * pow(rest, -1, part)) % part
    return (1 + rest * k) % modulus


@lru_cache(maxsize=256)
def _unit_group(q: int) -> _UnitGroup:
    gens: List[int] = []
    orders: List[int] = []
    for p, e in (sorted(factorize(q).items()) if q > 1 else []):
        pe = p ** e
        if p == 2:
            if e == 1:
                continue
            gens.append(_crt_lift(pe - 1, pe, q))
            orders.append(2)
            if e >= 3:
                gens.append(_crt_lift(5, pe, q))
                orders.append(2 ** (e - 2))
        else:
            gens.append(_crt_lift(_primitive_root_mod_prime_power(p, e), pe, q))
            orders.append(pe - pe // p)

    exponent = math.lcm(*orders) if orders else 1
    logs: Dict[int, Tuple[int, ...]] = {}
    for ks in itertools.product(*(range(o) for o in orders)):
        n = 1
        for g, k in zip(gens, ks):
            n = n * pow(g, k, q) % q
        logs[n % q] = ks
    if q == 1:
        logs = {0: ()}
    return _UnitGroup(q, tuple(gens), tuple(orders), exponent, logs)


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    exponent: int
    exponents: Tuple[int, ...]
    conductor: int
    primitive: bool
    parity: int
    index: Optional[int] = None

    @property
    def values(self) -> np.ndarray:
        e = np.asarray(self.exponents)
        table = np.exp(2j * np.pi * np.maximum(e, 0) / self.exponent)
        table[e < 0] = 0.0
        return table

    def __call__(self, n: int) -> complex:
        e = self.exponents[n % self.modulus]
        if e < 0:
            return 0j
        return cmath.exp(2j * math.pi * e / self.exponent)

    def values_upto(self, N: int) -> np.ndarray:
        """chi(n) for n = 1..N"""
        table = self.values
        return table[np.arange(1, N + 1) % self.modulus]

    @property
    def is_even(self) -> bool:
        return self.parity == 0

    @property
    def is_principal(self) -> bool:
        return all(e <= 0 for e in self.exponents)

    @property
    def order(self) -> int:
        g = 0
        for e in self.exponents:
            if e > 0:
                g = math.gcd(g, e)
        return self.exponent // math.gcd(self.exponent, g) if g else 1

    def same_as(self, other: "DirichletCharacter") -> bool:
        if self.modulus != other.modulus:
            return False
        E = math.lcm(self.exponent, other.exponent)
        a, b = E // self.exponent, E // other.exponent
        return all(
            (x < 0 and y < 0) or (x >= 0 and y >= 0 and (x * a - y * b) % E == 0)
            for x, y in zip(self.exponents, other.exponents)
        )

    def conj(self) -> "DirichletCharacter":
        exps = tuple(-1 if e < 0 else (-e) % self.exponent for e in self.exponents)
        return _build(self.modulus, self.exponent, exps)

    def lift(self, modulus: int) -> "DirichletCharacter":
        """The character mod a multiple of the modulus induced by this one."""
        if modulus % self.modulus:
            raise InvalidModulusError(f"{modulus} is not a multiple of {self.modulus}")
        exps = tuple(
            -1 if math.gcd(n, modulus) > 1 else self.exponents[n % self.modulus]
            for n in range(modulus)
        )
        return _build(modulus, self.exponent, exps)

    def label(self) -> str:
        return f"{self.modulus}.{self.index}" if self.index is not None else f"{self.modulus}.?"


def _conductor_of(q: int, E: int, exps: Tuple[int, ...]) -> int:
    for d in divisors(q):
        if all(exps[n] == 0 for n in range(1 % d, q, d) if exps[n] >= 0 and n % d == 1 % d):
            return d
    return q


def _build(q: int, E: int, exps: Tuple[int, ...], index: Optional[int] = None) -> DirichletCharacter:
    conductor = _conductor_of(q, E, exps)
    minus_one = exps[(q - 1) % q]
    # chi(-1) is exp(2 pi i e / E) with e in {0, E/2}
    parity = 0 if minus_one <= 0 else 1
    return DirichletCharacter(
        modulus=q,
        exponent=E,
        exponents=exps,
        conductor=conductor,
        primitive=conductor == q,
        parity=parity,
        index=index,
    )


def _check_modulus(q: int) -> None:
    if q < 1:
        raise InvalidModulusError(f"modulus must be a positive integer, got {q}")


def _from_logs(group: _UnitGroup, ls: Tuple[int, ...], index: int) -> DirichletCharacter:
    E = group.exponent
    exps = [-1] * group.modulus
    for n, ks in group.logs.items():
        exps[n] = sum(k * l * (E // o) for k, l, o in zip(ks, ls, group.orders)) % E
    return _build(group.modulus, E, tuple(exps), index)


@lru_cache(maxsize=128)
def _enumerate(q: int) -> Tuple[DirichletCharacter, ...]:
    group = _unit_group(q)
    return tuple(
        _from_logs(group, ls, index)
        for index, ls in enumerate(itertools.product(*(range(o) for o in group.orders)))
    )


def enumerate_characters(q: int) -> List[DirichletCharacter]:
    """All phi(q) characters mod q, principal first."""
    _check_modulus(q)
    chars = list(_enumerate(q))
    logger.debug("characters_enumerated", modulus=q, count=len(chars))
    return chars


def character(q: int, index: int) -> DirichletCharacter:
    """The index-th character of enumerate_characters(q)"""
    _check_modulus(q)
    group = _unit_group(q)
    count = math.prod(group.orders)
    if not 0 <= index < count:
        raise NoSuchCharacterError(f"modulus {q} has {count} characters, no index {index}")
    # mixed radix, last component fastest (matches itertools.product order)
    ls = []
    rest = index
    for o in reversed(group.orders):
        ls.append(rest % o)
        rest //= o
    return _from_logs(group, tuple(reversed(ls)), index)


def primitive_characters(q: int) -> List[DirichletCharacter]:
    return [chi for chi in enumerate_characters(q) if chi.primitive]


def conductor_and_primitivity(chi: DirichletCharacter) -> Tuple[int, bool, DirichletCharacter]:
    """
    Conductor, primitive flag and the primitive character inducing chi.
    """
    q1 = chi.conductor
    if q1 == chi.modulus:
        return q1, True, chi
    exps = [-1] * q1
    for m in range(q1):
        if math.gcd(m, q1) > 1:
            continue
        n = m if m else q1
        while math.gcd(n, chi.modulus) > 1:
            n += q1
        exps[m] = chi.exponents[n % chi.modulus]
    inducing = _build(q1, chi.exponent, tuple(exps))
    match = [c for c in enumerate_characters(q1) if c.same_as(inducing)]
    return q1, False, match[0] if match else inducing


def gauss_sum(chi: DirichletCharacter) -> Tuple[complex, complex]:
    """
    Gauss sum tau(chi) and root number tau(chi) / (i^a sqrt(q)).

    Raises:
        NonPrimitiveCharacterError: |tau| = sqrt(q) only holds for primitive chi
    """
    if not chi.primitive:
        raise NonPrimitiveCharacterError(
            f"character {chi.label()} has conductor {chi.conductor}, not primitive"
        )
    q = chi.modulus
    n = np.arange(q)
    tau = complex(np.sum(chi.values * np.exp(2j * np.pi * n / q)))
    epsilon = tau / ((1j ** chi.parity) * math.sqrt(q))
    return tau, epsilon


def detect_character(coeffs: Mapping[int, complex], q: int, tol: float = 1e-9) -> DirichletCharacter:
    """
    Recover the character mod q from periodic, multiplicative coefficients.

    Needs a_n for 1 <= n <= q^2. Complete multiplicativity is checked on the
    residues: periodicity a_n = a_(n + rq) first, then a_m a_n = a_(mn)
    for units m, n.
    """
    _check_modulus(q)
    top = q * q
    missing = [n for n in range(1, top + 1) if n not in coeffs]
    if missing:
        raise InsufficientDataError(
            f"detect_character needs a_1..a_{top}; missing {missing[:5]}", modulus=q
        )

    for n in range(1, top - q + 1):
        if abs(coeffs[n] - coeffs[n + q]) > tol:
            raise NoSuchCharacterError(f"coefficients are not {q}-periodic at n = {n}")

    E = _unit_group(q).exponent
    exps = [-1] * q
    for n in range(1, q + 1):
        if math.gcd(n, q) > 1:
            continue
        value = complex(coeffs[n])
        if abs(abs(value) - 1.0) > tol:
            raise NoSuchCharacterError(f"a_{n} = {value} is not a root of unity", n=n)
        turns = cmath.phase(value) / (2 * math.pi) * E
        e = round(turns) % E
        if abs(cmath.exp(2j * math.pi * e / E) - value) > tol:
            raise NoSuchCharacterError(
                f"a_{n} = {value} is not a root of unity of order dividing {E}", n=n
            )
        exps[n % q] = e

    units = [n for n in range(1, q + 1) if math.gcd(n, q) == 1]
    for m in units:
        for n in units:
            # a_m a_n against a_(mn); mn <= q^2 so every index is supplied
            if abs(coeffs[m] * coeffs[n] - coeffs[m * n]) > tol:
                raise NoSuchCharacterError(f"multiplicativity fails at ({m}, {n})", m=m, n=n)

    found = _build(q, E, tuple(exps))
    for chi in enumerate_characters(q):
        if chi.same_as(found):
            logger.info("character_detected", modulus=q, index=chi.index, conductor=chi.conductor)
            return chi
    raise NoSuchCharacterError(f"no character mod {q} matches the coefficients")
