import unittest
from collections import Counter
from unittest.mock import patch
import os
import sys

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from assoclab.counting import (
    Cycle,
    associativity_lemma_check,
    count_associative_triples,
    count_cycles,
    count_octahedra,
    count_rectangles,
    cycle_bounds,
    is_cycle,
    iter_cycles,
    measure,
    octahedron_density,
    popular_cycles,
    rectangle_label_histogram,
    signature_histogram,
    signature_occurrences,
    spectral_cycle_sum,
)
from assoclab.exceptions import InputError
from assoclab.pls import PartialLatinSquare, cyclic, fig1_instance, restrict_random, to_binary_op


class TestRectanglesAndOctahedra(unittest.TestCase):
    def test_group_tables_have_n_to_the_fifth_octahedra(self):
        for n in range(2, 9):
            pls = cyclic(n)
            self.assertEqual(count_octahedra(pls), n ** 5)
            self.assertEqual(count_rectangles(pls), n ** 4)

    def test_fast_count_matches_rectangle_pairing(self):
        for seed in range(6):
            pls = restrict_random(cyclic(5), 0.6, seed)
            self.assertEqual(count_octahedra(pls), count_octahedra(pls, method="naive"))

    def test_histogram_counts_every_rectangle(self):
        pls = restrict_random(cyclic(6), 0.7, 4)
        self.assertEqual(sum(rectangle_label_histogram(pls).values()), count_rectangles(pls))

    def test_fig1_rectangles_stay_inside_blocks(self):
        # two separate 2x2 blocks, four ordered row pairs with two shared columns each
        pls = fig1_instance()
        self.assertEqual(count_rectangles(pls), 4 * 2 ** 2 * 2)
        self.assertEqual(count_octahedra(pls), count_octahedra(pls, method="naive"))

    def test_octahedron_density_of_a_group(self):
        self.assertEqual(octahedron_density(cyclic(3)), 1)

    def test_unknown_method(self):
        with self.assertRaises(InputError):
            count_octahedra(cyclic(2), method="fast")

    def test_empty_instance(self):
        empty = PartialLatinSquare((3, 3, 3), ())
        self.assertEqual(count_octahedra(empty), 0)
        self.assertEqual(count_cycles(empty, "label", 2), 0)


class TestCycles(unittest.TestCase):
    def test_group_tables_have_n_to_the_2r_cycles(self):
        for n in (3, 4):
            for kind in ("label", "row", "column"):
                for r in (2, 3):
                    self.assertEqual(count_cycles(cyclic(n), kind, r), n ** (2 * r))

    def test_matrix_count_matches_walk_enumeration(self):
        for seed in range(4):
            pls = restrict_random(cyclic(6), 0.5, seed)
            for kind in ("label", "row", "column"):
                for r in (2, 3):
                    self.assertEqual(count_cycles(pls, kind, r), count_cycles(pls, kind, r, method="walk"))

    def test_spectral_identity(self):
        pls = restrict_random(cyclic(9), 0.5, 11)
        for r in (2, 3, 4):
            exact = count_cycles(pls, "label", r)
            self.assertAlmostEqual(spectral_cycle_sum(pls, "label", r), exact, delta=1e-6 * max(exact, 1))

    def test_cycle_count_bounds_hold(self):
        for seed in range(10):
            pls = restrict_random(cyclic(8), 0.4 + 0.05 * seed, seed)
            for r in (2, 3, 4):
                self.assertTrue(cycle_bounds(pls, "label", r)["ok"])

    def test_enumerated_cycles_are_cycles(self):
        pls = restrict_random(cyclic(4), 0.8, 1)
        for kind in ("label", "row", "column"):
            for cycle in iter_cycles(pls, kind, 2):
                self.assertTrue(is_cycle(pls, cycle))

    def test_broken_cycle_is_detected(self):
        pls = cyclic(3)
        good = Cycle("label", ((0, 0, 0), (1, 0, 1), (1, 1, 2), (0, 1, 1)))
        self.assertTrue(is_cycle(pls, good))
        bad = Cycle("label", ((0, 0, 0), (1, 0, 1), (2, 1, 0), (0, 1, 1)))
        self.assertFalse(is_cycle(pls, bad))

    def test_short_cycles_are_rejected(self):
        with self.assertRaises(InputError):
            count_cycles(cyclic(3), "label", 1)
        with self.assertRaises(InputError):
            count_cycles(cyclic(3), "diagonal", 2)


class TestSignatures(unittest.TestCase):
    def test_signature_occurs_n_times_in_a_group(self):
        self.assertEqual(signature_occurrences(cyclic(5), "label", (0, 1, 2, 1)), 5)
        self.assertEqual(signature_histogram(cyclic(5), "label", 2)[(0, 1, 2, 1)], 5)

    def test_histogram_matches_enumeration(self):
        pls = restrict_random(cyclic(5), 0.6, 3)
        histogram = signature_histogram(pls, "row", 2)
        self.assertEqual(sum(histogram.values()), count_cycles(pls, "row", 2))
        for signature, count in list(histogram.items())[:10]:
            self.assertEqual(signature_occurrences(pls, "row", signature), count)

    def test_every_group_signature_is_popular(self):
        self.assertEqual(len(popular_cycles(cyclic(4), "label", 2, 1.0)), 4 ** 3)

    @patch("assoclab.counting.signature_histogram")
    def test_impossible_occurrence_count_is_an_input_error(self, mock_histogram):
        mock_histogram.return_value = Counter({(0, 1, 2, 3): 9})
        with self.assertRaises(InputError):
            popular_cycles(cyclic(4), "label", 2, 1.0)


class TestAssociativeTriples(unittest.TestCase):
    def test_group_tables_are_associative(self):
        for n in range(2, 9):
            self.assertEqual(count_associative_triples(to_binary_op(cyclic(n))), n ** 3)

    def test_vectorized_matches_triple_loop(self):
        for seed in range(5):
            op = to_binary_op(restrict_random(cyclic(6), 0.6, seed))
            self.assertEqual(count_associative_triples(op), count_associative_triples(op, method="naive"))

    def test_octahedra_bound_by_associative_triples(self):
        for seed in range(50):
            n = 6 + seed % 7
            op = to_binary_op(restrict_random(cyclic(n), 0.3 + 0.01 * seed, seed))
            self.assertTrue(associativity_lemma_check(op)["ok"])

    def test_measure_reports_csv(self):
        report = measure("octahedra", count_octahedra, cyclic(4))
        self.assertEqual(report.value, 1024)
        self.assertTrue(report.csv_line().startswith("octahedra,1024,hash-grouped,"))


if __name__ == '__main__':
    unittest.main()
