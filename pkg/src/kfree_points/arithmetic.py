# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""Exact integer and prime machinery.

This module holds the number theory every other module leans on: prime tables, the k-free
integer predicate and its vectorised sieve, zeta values with a certified truncation error and a
componentwise Chinese Remainder Theorem solver.

```python
from kfree_points.arithmetic import CrtSystem, crt_solve, sieve_primes, zeta

sieve_primes(10).primes                 # (2, 3, 5, 7)
zeta(2).value                           # 1.6449340668...
crt_solve(CrtSystem(residues=[(4, [1]), (9, [0]), (25, [24])]))   # (549,)
```
"""

import functools
import itertools
import logging
import math
import sys

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from kfree_points.errors import DivergenceError, EmptyTableError, NotCoprimeError, ParameterError

logger = logging.getLogger(__name__)

DEFAULT_ZETA_TOLERANCE = 1e-12


class PrimeTable(BaseModel):
    """All primes up to and including `limit`, in increasing order."""

    model_config = ConfigDict(frozen=True)

    limit: int
    primes: tuple[int, ...]

    @model_validator(mode="after")
    def _check_ordered(self):
        if any(a >= b for a, b in itertools.pairwise(self.primes)):
            raise ValueError("primes must be strictly increasing")
        if self.primes and self.primes[-1] > self.limit:
            raise ValueError(f"prime {self.primes[-1]} exceeds limit {self.limit}")
        return self


class ZetaValue(BaseModel):
    """A value of Riemann's zeta function together with a bound on its error."""

    model_config = ConfigDict(frozen=True)

    s: int
    value: float
    truncation_error: float
    terms: int

    @field_validator("s")
    @classmethod
    def _check_exponent(cls, s):
        if s < 2:
            raise ValueError(f"zeta exponent must be at least 2, got {s}")
        return s


class CrtSystem(BaseModel):
    """Congruences `x = target (mod modulus)`, applied componentwise to integer vectors."""

    model_config = ConfigDict(frozen=True)

    residues: tuple[tuple[int, tuple[int, ...]], ...]

    @model_validator(mode="after")
    def _check_shape(self):
        if not self.residues:
            raise ValueError("a congruence system needs at least one congruence")
        dims = {len(target) for _, target in self.residues}
        if len(dims) != 1:
            raise ValueError(f"target vectors have mixed dimensions {sorted(dims)}")
        for modulus, _ in self.residues:
            if modulus < 1:
                raise ValueError(f"modulus must be positive, got {modulus}")
        return self

    @property
    def dimension(self) -> int:
        """Dimension shared by all target vectors."""
        return len(self.residues[0][1])


@functools.lru_cache(maxsize=32)
def sieve_primes(limit: int) -> PrimeTable:
    """Return the table of all primes up to `limit` (sieve of Eratosthenes)."""
    if limit < 2:
        raise EmptyTableError(f"no primes below {limit}; the limit must be at least 2")
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    primes = tuple(int(p) for p in np.flatnonzero(is_prime))
    logger.debug("sieved %d primes up to %d", len(primes), limit)
    return PrimeTable(limit=limit, primes=primes)


def first_primes(count: int) -> tuple[int, ...]:
    """Return the `count` smallest primes."""
    if count <= 0:
        return ()
    # Rosser's bound p_n < n (log n + log log n) for n >= 6
    limit = 15 if count < 6 else int(count * (math.log(count) + math.log(math.log(count)))) + 1
    primes = sieve_primes(limit).primes
    while len(primes) < count:
        limit *= 2
        primes = sieve_primes(limit).primes
    return primes[:count]


def integer_root(x: int, k: int) -> int:
    """Return the largest integer r with r**k <= x."""
    if x < 0 or k < 1:
        raise ParameterError(f"integer root needs x >= 0 and k >= 1, got x={x}, k={k}")
    if x < 2 or k == 1:
        return x
    r = int(round(x ** (1.0 / k)))
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def is_kfree_integer(m: int, k: int) -> bool:
    """Report whether no prime power p**k divides the positive integer `m`.

    For k = 1 only m = 1 qualifies. Zero is divisible by everything and is rejected, so that
    callers apply their own convention for it explicitly.
    """
    if k < 1:
        raise ParameterError(f"k must be at least 1, got {k}")
    if m == 0:
        raise ParameterError("0 is divisible by every k-th power; handle m = 0 before calling")
    if m < 0:
        raise ParameterError(f"m must be positive, got {m}")
    if k == 1:
        return m == 1
    rest = m
    p = 2
    while p**k <= rest:
        if rest % p == 0:
            exponent = 0
            while rest % p == 0:
                rest //= p
                exponent += 1
            if exponent >= k:
                return False
        p += 1 if p == 2 else 2
    return True


@functools.lru_cache(maxsize=16)
def kfree_table(limit: int, k: int) -> np.ndarray:
    """Return a read-only boolean array `table` with `table[m]` true iff m is k-free.

    0 is not k-free.
    """
    if k < 1:
        raise ParameterError(f"k must be at least 1, got {k}")
    if k == 1:
        table = np.arange(max(limit, 0) + 1) == 1
        table.flags.writeable = False
        return table
    table = np.ones(max(limit, 0) + 1, dtype=bool)
    table[0] = False
    root = integer_root(max(limit, 0), k)
    if root >= 2:
        for p in sieve_primes(root).primes:
            step = p**k
            table[step::step] = False
    table.flags.writeable = False
    return table


def prime_factors(q: int) -> dict[int, int]:
    """Return the factorisation of a positive integer as `{prime: exponent}`."""
    if q < 1:
        raise ParameterError(f"only positive integers can be factorised, got {q}")
    factors = {}
    rest = q
    p = 2
    while p * p <= rest:
        while rest % p == 0:
            factors[p] = factors.get(p, 0) + 1
            rest //= p
        p += 1 if p == 2 else 2
    if rest > 1:
        factors[rest] = factors.get(rest, 0) + 1
    return factors


@functools.lru_cache(maxsize=64)
def zeta(s: int, tolerance: float = DEFAULT_ZETA_TOLERANCE) -> ZetaValue:
    """Evaluate zeta(s) for an integer s >= 2 with a certified error bound.

    The partial sum of N terms is completed by the midpoint of the integral bracket
    [(N+1)^(1-s), N^(1-s)] / (s-1) for the tail. The bracket half-width is below N^(-s)/2,
    which fixes N from the tolerance.
    """
    if s <= 1:
        raise DivergenceError(f"zeta diverges at s={s}; need s >= 2")
    terms = max(math.ceil(tolerance ** (-1.0 / s)), 2)
    # summed smallest first
    partial = math.fsum(np.arange(terms, 0, -1, dtype=np.float64) ** (-s))
    lower = (terms + 1) ** (1 - s) / (s - 1)
    upper = terms ** (1 - s) / (s - 1)
    value = partial + (lower + upper) / 2
    rounding = 4 * sys.float_info.epsilon * value
    error = (upper - lower) / 2 + rounding
    logger.debug("zeta(%d) with %d terms, error bound %.3g", s, terms, error)
    return ZetaValue(s=s, value=value, truncation_error=error, terms=terms)


def crt_solve(system: CrtSystem) -> tuple[int, ...]:
    """Solve a componentwise congruence system with pairwise coprime moduli.

    Each component of the result is reduced into [0, product of the moduli).
    """
    moduli = [modulus for modulus, _ in system.residues]
    for a, b in itertools.combinations(moduli, 2):
        if math.gcd(a, b) != 1:
            raise NotCoprimeError(a, b)
    total = math.prod(moduli)
    result = [0] * system.dimension
    for modulus, target in system.residues:
        cofactor = total // modulus
        inverse = pow(cofactor, -1, modulus) if modulus > 1 else 0
        for index, value in enumerate(target):
            result[index] += value * cofactor * inverse
    return tuple(component % total for component in result)
