# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

import math
import unittest

import mpmath
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from kfree_points.arithmetic import (
    CrtSystem,
    PrimeTable,
    crt_solve,
    first_primes,
    integer_root,
    is_kfree_integer,
    kfree_table,
    prime_factors,
    sieve_primes,
    zeta,
)
from kfree_points.errors import (
    DivergenceError,
    EmptyTableError,
    NotCoprimeError,
    ParameterError,
)


class TestPrimes(unittest.TestCase):
    def test_sieve_small(self):
        self.assertEqual(sieve_primes(10).primes, (2, 3, 5, 7))
        self.assertEqual(sieve_primes(2).primes, (2,))

    def test_sieve_matches_sympy(self):
        self.assertEqual(sieve_primes(5000).primes, tuple(sympy.primerange(2, 5001)))

    def test_sieve_rejects_empty_table(self):
        with self.assertRaises(EmptyTableError):
            sieve_primes(1)

    def test_first_primes(self):
        self.assertEqual(first_primes(6), (2, 3, 5, 7, 11, 13))
        self.assertEqual(first_primes(0), ())
        self.assertEqual(first_primes(1000)[-1], sympy.prime(1000))

    def test_prime_table_must_be_ordered(self):
        with self.assertRaises(ValidationError):
            PrimeTable(limit=10, primes=(3, 2))


class TestIntegerRoot(unittest.TestCase):
    def test_exact_and_inexact(self):
        self.assertEqual(integer_root(27, 3), 3)
        self.assertEqual(integer_root(26, 3), 2)
        self.assertEqual(integer_root(10**40, 2), 10**20)
        self.assertEqual(integer_root(1, 5), 1)
        self.assertEqual(integer_root(0, 2), 0)

    @given(st.integers(min_value=0, max_value=10**30), st.integers(min_value=1, max_value=6))
    def test_root_brackets_input(self, x, k):
        r = integer_root(x, k)
        self.assertLessEqual(r**k, x)
        self.assertGreater((r + 1) ** k, x)

    def test_rejects_negative(self):
        with self.assertRaises(ParameterError):
            integer_root(-1, 2)


class TestKFreeIntegers(unittest.TestCase):
    def test_examples(self):
        self.assertFalse(is_kfree_integer(12, 2))
        self.assertFalse(is_kfree_integer(18, 2))
        self.assertTrue(is_kfree_integer(30, 2))
        self.assertFalse(is_kfree_integer(8, 3))
        self.assertTrue(is_kfree_integer(12, 3))
        self.assertTrue(is_kfree_integer(1, 4))

    def test_one_free_means_one(self):
        self.assertTrue(is_kfree_integer(1, 1))
        self.assertFalse(is_kfree_integer(2, 1))
        self.assertFalse(is_kfree_integer(7, 1))

    def test_zero_is_rejected(self):
        with self.assertRaises(ParameterError):
            is_kfree_integer(0, 2)
        with self.assertRaises(ParameterError):
            is_kfree_integer(-3, 2)
        with self.assertRaises(ParameterError):
            is_kfree_integer(3, 0)

    @settings(max_examples=300)
    @given(st.integers(min_value=1, max_value=10**7), st.integers(min_value=2, max_value=4))
    def test_agrees_with_factorisation(self, m, k):
        exponents = sympy.factorint(m).values()
        self.assertEqual(is_kfree_integer(m, k), all(e < k for e in exponents))

    def test_table_agrees_with_predicate(self):
        for k in (1, 2, 3):
            table = kfree_table(500, k)
            self.assertFalse(table[0])
            for m in range(1, 501):
                self.assertEqual(bool(table[m]), is_kfree_integer(m, k), (m, k))

    def test_table_is_read_only(self):
        table = kfree_table(100, 2)
        with self.assertRaises(ValueError):
            table[4] = True

    def test_squarefree_proportion(self):
        table = kfree_table(10**6, 2)
        self.assertAlmostEqual(table.sum() / 10**6, 6 / math.pi**2, places=3)


class TestPrimeFactors(unittest.TestCase):
    def test_example(self):
        self.assertEqual(prime_factors(360), {2: 3, 3: 2, 5: 1})
        self.assertEqual(prime_factors(1), {})
        self.assertEqual(prime_factors(97), {97: 1})

    @given(st.integers(min_value=1, max_value=10**9))
    def test_matches_sympy(self, q):
        self.assertEqual(prime_factors(q), dict(sympy.factorint(q)))

    def test_rejects_zero(self):
        with self.assertRaises(ParameterError):
            prime_factors(0)


class TestZeta(unittest.TestCase):
    def test_zeta_two(self):
        result = zeta(2)
        self.assertLessEqual(result.truncation_error, 1e-12)
        self.assertLessEqual(abs(result.value - math.pi**2 / 6), result.truncation_error + 1e-15)

    def test_matches_mpmath(self):
        for s in (3, 4, 6, 9):
            result = zeta(s)
            expected = float(mpmath.zeta(s))
            self.assertLessEqual(abs(result.value - expected), result.truncation_error + 1e-15)

    def test_looser_tolerance_uses_fewer_terms(self):
        self.assertLess(zeta(2, 1e-6).terms, zeta(2, 1e-12).terms)
        self.assertLessEqual(zeta(2, 1e-6).truncation_error, 1e-6)

    def test_divergence(self):
        with self.assertRaises(DivergenceError):
            zeta(1)
        with self.assertRaises(DivergenceError):
            zeta(0)


class TestCrt(unittest.TestCase):
    def test_center_of_three_consecutive_non_squarefree(self):
        system = CrtSystem(residues=[(4, [1]), (9, [0]), (25, [24])])
        self.assertEqual(crt_solve(system), (549,))

    def test_componentwise(self):
        system = CrtSystem(residues=[(3, (1, 2)), (5, (4, 0))])
        x, y = crt_solve(system)
        self.assertEqual((x % 3, x % 5), (1, 4))
        self.assertEqual((y % 3, y % 5), (2, 0))
        self.assertLess(max(x, y), 15)

    def test_not_coprime(self):
        with self.assertRaises(NotCoprimeError) as ctx:
            crt_solve(CrtSystem(residues=[(4, (1,)), (6, (1,))]))
        self.assertEqual(ctx.exception.pair, (4, 6))
        self.assertIsInstance(ctx.exception, ParameterError)

    def test_invalid_systems(self):
        with self.assertRaises(ValidationError):
            CrtSystem(residues=[])
        with self.assertRaises(ValidationError):
            CrtSystem(residues=[(3, (1,)), (5, (1, 2))])
        with self.assertRaises(ValidationError):
            CrtSystem(residues=[(0, (1,))])

    @given(
        st.lists(st.sampled_from(first_primes(30)), min_size=1, max_size=6, unique=True),
        st.data(),
    )
    def test_solution_satisfies_congruences(self, primes, data):
        moduli = [p ** data.draw(st.integers(1, 3)) for p in primes]
        residues = [(m, (data.draw(st.integers(-(10**6), 10**6)),)) for m in moduli]
        (x,) = crt_solve(CrtSystem(residues=residues))
        self.assertLess(x, math.prod(moduli))
        for m, (target,) in residues:
            self.assertEqual(x % m, target % m)
