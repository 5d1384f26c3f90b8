# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

import math
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from kfree_points.dynamics import (
    ProximalityWitness,
    config_distance,
    ergodicity_evidence,
    genericity_check,
    proximality_witness,
    verify_proximality,
)
from kfree_points.errors import ParameterError
from kfree_points.kfree import Configuration, KFreeParams, find_hole, is_kfree_point
from kfree_points.lattice import ball_offsets, standard_lattice
from kfree_points.patches import Patch, census

VISIBLE = KFreeParams(n=2, k=1)
SQUAREFREE = KFreeParams(n=1, k=2)
Z2 = standard_lattice(2)
Z1 = standard_lattice(1)


def configurations():
    """Finite configurations in a 7x7 box, known everywhere."""
    points = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
    return st.sets(points, max_size=12).map(lambda chosen: Configuration(points=chosen))


class TestConfigDistance(unittest.TestCase):
    def test_difference_at_origin(self):
        distance = config_distance(Configuration(points=[(0, 0)]), Configuration())
        self.assertEqual(distance.value, 1.0)
        self.assertTrue(distance.decided)

    def test_first_difference_sets_radius(self):
        distance = config_distance(Configuration(points=[(3, 0)]), Configuration())
        self.assertAlmostEqual(distance.value, 1 / 3)
        self.assertTrue(distance.decided)

    def test_agreement_inside_window_is_a_bound(self):
        x = Configuration(points=[(1, 2)], window_radius=10.0)
        distance = config_distance(x, x)
        self.assertEqual(distance.value, 0.1)
        self.assertFalse(distance.decided)

    def test_differences_outside_window_are_ignored(self):
        x = Configuration(points=[(20, 0)], window_radius=10.0)
        y = Configuration(window_radius=10.0)
        self.assertFalse(config_distance(x, y).decided)

    def test_unbounded_windows(self):
        x = Configuration(points=[(1, 2)])
        self.assertEqual(config_distance(x, x).value, 0.0)
        self.assertTrue(config_distance(x, x).decided)

    @settings(max_examples=200, deadline=None)
    @given(configurations(), configurations(), configurations())
    def test_symmetric_and_triangle(self, x, y, z):
        xy, yx = config_distance(x, y), config_distance(y, x)
        self.assertEqual(xy, yx)
        self.assertEqual(config_distance(x, x).value, 0.0)
        xz, yz = config_distance(x, z).value, config_distance(y, z).value
        self.assertLessEqual(xz, xy.value + yz + 1e-12)
        self.assertLessEqual(xz, max(xy.value, yz) + 1e-12)
        self.assertEqual(xy.value == 0.0, x == y)


class TestProximality(unittest.TestCase):
    def test_unit_shift(self):
        witness = proximality_witness((1, 0), 1.0, VISIBLE, Z2)
        self.assertEqual(len(witness.certificate.assignment), 8)
        self.assertEqual(witness.distance_bound, 1.0)
        self.assertTrue(verify_proximality(witness, VISIBLE, Z2))

    def test_both_translates_are_empty(self):
        witness = proximality_witness((0, 2), 1.5, VISIBLE, Z2)
        for u in ball_offsets(Z2, 1.5, closed=True):
            self.assertFalse(is_kfree_point((u[0] - witness.t[0], u[1] - witness.t[1]), VISIBLE))
            shifted = (u[0] - witness.t[0], u[1] - 2 - witness.t[1])
            self.assertFalse(is_kfree_point(shifted, VISIBLE))

    def test_zero_shift_is_a_hole(self):
        witness = proximality_witness((0, 0), 1.0, VISIBLE, Z2)
        self.assertEqual(witness.certificate, find_hole(VISIBLE, Z2, 1.0))

    def test_squarefree(self):
        witness = proximality_witness((3,), 1.0, SQUAREFREE, Z1)
        self.assertEqual(len(witness.certificate.assignment), 6)
        self.assertTrue(verify_proximality(witness, SQUAREFREE, Z1))

    def test_tampered_witness_fails(self):
        witness = proximality_witness((1, 0), 1.0, VISIBLE, Z2)
        moved = witness.model_copy(update={"t": (witness.t[0] + 1, witness.t[1])})
        self.assertFalse(verify_proximality(moved, VISIBLE, Z2))

    def test_distance_bound(self):
        witness = proximality_witness((1, 0), 2.0, VISIBLE, Z2)
        self.assertIsInstance(witness, ProximalityWitness)
        self.assertEqual(witness.distance_bound, 0.5)

    def test_invalid_arguments(self):
        with self.assertRaises(ParameterError):
            proximality_witness((1, 0), 0.0, VISIBLE, Z2)
        with self.assertRaises(ParameterError):
            proximality_witness((1,), 1.0, VISIBLE, Z2)
        with self.assertRaises(ParameterError):
            proximality_witness((1, 0), 1.0, VISIBLE, Z1)


class TestOrbitStatistics(unittest.TestCase):
    def test_ergodicity_evidence(self):
        p = Patch(points=[(0, 0)], window_radius=0.5)
        q = Patch(points=[], window_radius=0.5)
        evidence = ergodicity_evidence(p, q, VISIBLE, Z2, 100.0)
        self.assertTrue(is_kfree_point(evidence.anchor, VISIBLE))
        self.assertTrue(evidence.positive)
        self.assertAlmostEqual(evidence.evidence, 1 - 6 / math.pi**2, delta=0.02)
        self.assertAlmostEqual(evidence.frequency_q, 1 - 6 / math.pi**2, delta=1e-9)

    def test_ergodicity_between_common_patches(self):
        found = census(VISIBLE, Z2, 1.1, 60.0)
        common = sorted(found.sorted_patches(), key=lambda item: -item[1])[:4]
        patches = [found.patch(key) for key, _ in common]
        for p in patches:
            for q in patches:
                evidence = ergodicity_evidence(p, q, VISIBLE, Z2, 60.0, search_radius=60.0)
                self.assertTrue(evidence.positive)
                self.assertAlmostEqual(evidence.evidence, evidence.frequency_q, delta=0.03)

    def test_ergodicity_needs_p_to_occur(self):
        inadmissible = Patch(points=[(0, 0), (0, 1), (1, 0), (1, 1)], window_radius=1.5)
        q = Patch(points=[], window_radius=0.5)
        with self.assertRaises(ParameterError):
            ergodicity_evidence(inadmissible, q, VISIBLE, Z2, 20.0, search_radius=20.0)

    def test_genericity(self):
        check = genericity_check(Patch(points=[(0, 0)], window_radius=0.5), VISIBLE, Z2, 300.0)
        self.assertLessEqual(check.gap, 0.01)
        self.assertAlmostEqual(check.nu_value, 6 / math.pi**2, delta=1e-9)
        with self.assertRaises(ParameterError):
            genericity_check(Patch(points=[], window_radius=0.5), VISIBLE, Z2, 0.0)
