# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

import itertools
import math
import unittest
from collections import defaultdict
from fractions import Fraction

import sympy
from pydantic import ValidationError

from kfree_points.diffraction import (
    SpectrumWindow,
    bragg_dataset,
    empirical_amplitude,
    enumerate_spectrum,
    intensity,
    relative_intensity,
    spectrum_denominators,
)
from kfree_points.errors import NotInSpectrumError, ParameterError
from kfree_points.kfree import KFreeParams, density_estimate
from kfree_points.lattice import DualPoint, standard_lattice

VISIBLE = KFreeParams(n=2, k=1)
SQUAREFREE = KFreeParams(n=1, k=2)
Z2 = standard_lattice(2)

QUOTED_DENOMINATORS = {1, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 21, 22, 26, 30, 33}
EXACT_DENOMINATORS = QUOTED_DENOMINATORS | {17, 19, 23, 29, 31, 34}


def brute_force_spectrum(lower, upper, threshold, max_q=40):
    """All reduced fractions a/q in the box with squarefree q above the intensity floor."""
    found = set()
    for q in range(1, max_q + 1):
        factors = sympy.factorint(q)
        if any(e > 1 for e in factors.values()):
            continue
        if Fraction(1, math.prod(p * p - 1 for p in factors)) ** 2 < Fraction(repr(threshold)):
            continue
        ranges = [range(math.ceil(lo * q), math.floor(hi * q) + 1) for lo, hi in zip(lower, upper)]
        for numerators in itertools.product(*ranges):
            if math.gcd(q, *numerators) == 1:
                found.add((numerators, q))
    return found


class TestIntensity(unittest.TestCase):
    def test_peak_at_origin(self):
        self.assertAlmostEqual(intensity(1, VISIBLE), (6 / math.pi**2) ** 2, places=12)

    def test_ratio_at_half(self):
        self.assertAlmostEqual(intensity(2, VISIBLE) / intensity(1, VISIBLE), 1 / 9, places=15)
        self.assertEqual(relative_intensity(2, VISIBLE), 1 / 9)
        self.assertAlmostEqual(intensity(2, VISIBLE), 4 / math.pi**4, places=12)

    def test_extinct_denominators(self):
        with self.assertRaises(NotInSpectrumError):
            intensity(4, VISIBLE)
        with self.assertRaises(ParameterError):
            intensity(0, VISIBLE)
        self.assertGreater(intensity(4, SQUAREFREE), 0)
        with self.assertRaises(NotInSpectrumError):
            intensity(8, SQUAREFREE)


class TestDenominators(unittest.TestCase):
    def test_figure_threshold(self):
        found = set(spectrum_denominators(VISIBLE, 1e-6))
        self.assertTrue(QUOTED_DENOMINATORS <= found)
        self.assertEqual(found, EXACT_DENOMINATORS)

    def test_full_threshold(self):
        self.assertEqual(spectrum_denominators(VISIBLE, 1.0), [1])

    def test_cube_free(self):
        self.assertEqual(spectrum_denominators(SQUAREFREE, 1e-2), [1, 2, 3, 4, 9])

    def test_every_denominator_clears_threshold(self):
        for q in spectrum_denominators(KFreeParams(n=3, k=1), 1e-9):
            self.assertGreaterEqual(relative_intensity(q, KFreeParams(n=3, k=1)), 1e-9)


class TestEnumeration(unittest.TestCase):
    def test_integer_points_only(self):
        window = SpectrumWindow(lower=(0, 0), upper=(2, 2), threshold=1.0)
        points = enumerate_spectrum(window, VISIBLE, Z2)
        self.assertEqual(len(points), 9)
        self.assertEqual(
            [p.y.numerators for p in points], sorted(itertools.product(range(3), repeat=2))
        )

    def test_matches_brute_force(self):
        window = SpectrumWindow(lower=(0, 0), upper=(1, 1), threshold=1e-6)
        found = {(p.y.numerators, p.q) for p in enumerate_spectrum(window, VISIBLE, Z2)}
        self.assertEqual(found, brute_force_spectrum((0, 0), (1, 1), 1e-6))

    def test_ordering_and_equal_intensities(self):
        window = SpectrumWindow(lower=(0, 0), upper=(2, 2), threshold=1e-6)
        points = enumerate_spectrum(window, VISIBLE, Z2)
        keys = [(-p.intensity, p.y.coords) for p in points]
        self.assertEqual(keys, sorted(keys))
        by_q = defaultdict(set)
        for point in points:
            by_q[point.q].add(point.intensity)
        self.assertTrue(all(len(values) == 1 for values in by_q.values()))
        self.assertIn(DualPoint.from_coords(["1/3", "2/3"]), {p.y for p in points})

    def test_unit_boxes_carry_equal_weight(self):
        totals = []
        for i, j in itertools.product(range(4), repeat=2):
            window = SpectrumWindow(lower=(i, j), upper=(i + 1, j + 1), threshold=1e-6)
            totals.append(math.fsum(p.intensity for p in enumerate_spectrum(window, VISIBLE, Z2)))
        self.assertLess(max(totals) - min(totals), 1e-12 * max(totals))

    def test_window_validation(self):
        with self.assertRaises(ValidationError):
            SpectrumWindow(lower=(0, 0), upper=(1, 1), threshold=0.0)
        with self.assertRaises(ValidationError):
            SpectrumWindow(lower=(2, 0), upper=(1, 1), threshold=0.5)
        with self.assertRaises(ParameterError):
            SpectrumWindow.parse_box("0,0,2", 1e-6)
        with self.assertRaises(ParameterError):
            enumerate_spectrum(SpectrumWindow.parse_box("0,2", 1e-6), VISIBLE, Z2)

    def test_dataset(self):
        rows = bragg_dataset(VISIBLE, Z2)
        self.assertEqual((rows[0].y, rows[0].q, rows[0].ratio), ((0.0, 0.0), 1, 1.0))
        half = next(row for row in rows if row.y == (1.0, 0.5))
        self.assertEqual(half.q, 2)
        self.assertAlmostEqual(half.ratio, 1 / 9, places=15)
        for row in rows:
            self.assertTrue(all(e == 1 for e in sympy.factorint(row.q).values()))
        self.assertEqual({row.q for row in rows}, EXACT_DENOMINATORS)


class TestEmpiricalAmplitude(unittest.TestCase):
    def test_origin_is_density(self):
        amplitude = empirical_amplitude(DualPoint.from_coords([0, 0]), VISIBLE, Z2, 120.0)
        self.assertAlmostEqual(amplitude.imag, 0.0, places=12)
        self.assertAlmostEqual(amplitude.real, density_estimate(VISIBLE, Z2, 120.0), places=12)

    def test_half_half(self):
        y = DualPoint.from_coords(["1/2", "1/2"])
        amplitude = empirical_amplitude(y, VISIBLE, Z2, 300.0)
        self.assertLess(abs(abs(amplitude) ** 2 / intensity(2, VISIBLE) - 1), 0.15)

    def test_workers_do_not_change_amplitude(self):
        y = DualPoint.from_coords(["1/3", "2/3"])
        self.assertEqual(
            empirical_amplitude(y, VISIBLE, Z2, 80.0),
            empirical_amplitude(y, VISIBLE, Z2, 80.0, workers=4),
        )

    def test_preconditions(self):
        with self.assertRaises(ParameterError):
            empirical_amplitude(DualPoint.from_coords([0, 0]), VISIBLE, Z2, 10.0)
        with self.assertRaises(ParameterError):
            empirical_amplitude(DualPoint.from_coords([0]), VISIBLE, Z2, 60.0)
