import unittest
import os
import sys

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from assoclab.entropy import (
    cyclic_space,
    discrete_space,
    entropy_report,
    euclidean_space,
    expansion,
    getrag_check,
    is_net,
    is_separated,
    lemma_checks,
    matrix_space,
    net,
    nu,
    plunnecke_check,
    popular_elements,
    product_set,
    product_space,
    rough_approx_check,
    ruzsa_cover,
    separated_set,
    sigma,
    space_to_dict,
)
from assoclab.exceptions import InputError, ResourceExhausted


class TestSpaces(unittest.TestCase):
    def test_cyclic_word_metric(self):
        space = cyclic_space(12)
        self.assertEqual(space.dist[1, 11], 2)
        self.assertTrue(space.bi_invariant)
        self.assertTrue(space.check_bi_invariance())

    def test_triangle_inequality_is_enforced(self):
        with self.assertRaises(InputError):
            matrix_space({"distances": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]})

    def test_null_distance_is_infinite(self):
        space = matrix_space({"distances": [[0, None], [None, 0]]})
        self.assertTrue(is_separated(space, [0, 1], 1e9))

    def test_dict_round_trip(self):
        space = cyclic_space(5)
        again = matrix_space(space_to_dict(space))
        self.assertEqual(again.dist.tolist(), space.dist.tolist())
        self.assertTrue(again.bi_invariant)
        self.assertEqual(product_set(again, [1], [4]), [0])

    def test_missing_group(self):
        with self.assertRaises(InputError):
            product_set(euclidean_space([[0.0], [1.0]]), [0], [1])

    def test_product_space_uses_the_max_metric(self):
        square = product_space(cyclic_space(4), cyclic_space(4))
        self.assertEqual(len(square), 16)
        self.assertEqual(square.dist[0 * 4 + 1, 2 * 4 + 1], 2)
        self.assertEqual(square.dist[0 * 4 + 0, 1 * 4 + 3], 1)

    def test_expansion(self):
        self.assertEqual(expansion(cyclic_space(10), [0], 2), [0, 1, 2, 8, 9])


class TestSeparatedSetsAndNets(unittest.TestCase):
    def test_interval_in_z12(self):
        space = cyclic_space(12)
        xs = range(5)
        self.assertEqual(separated_set(space, xs, 2), [0, 2, 4])
        self.assertEqual(sigma(space, xs, 2), 3)
        self.assertEqual(nu(space, xs, 2), 2)
        self.assertEqual(nu(space, xs, 2, strict=False), 1)
        self.assertTrue(is_net(space, net(space, xs, 2, "exact"), xs, 2))

    def test_report(self):
        report = entropy_report(cyclic_space(12), range(5), 2)
        self.assertEqual((report.sigma_greedy, report.nu_greedy), (3, 3))
        self.assertEqual((report.sigma_exact, report.nu_exact, report.nu_closed_exact), (3, 2, 1))
        self.assertEqual(report.to_dict()["witnesses"]["separated_greedy"], [0, 2, 4])

    def test_greedy_set_is_separated_and_a_net(self):
        space = euclidean_space([[0, 0], [0.5, 0], [1, 1], [3, 0], [3, 0.4], [2, 2]])
        chosen = separated_set(space, space.all, 1.0)
        self.assertTrue(is_separated(space, chosen, 1.0))
        self.assertTrue(is_net(space, chosen, space.all, 1.0))
        self.assertGreaterEqual(sigma(space, space.all, 1.0), len(chosen))

    def test_net_candidates_outside_the_set(self):
        space = cyclic_space(12)
        self.assertEqual(net(space, [0, 2], 2, "exact", candidates=space.all), [1])
        with self.assertRaises(InputError):
            net(space, [0, 6], 1, "exact", candidates=[3])

    def test_exact_limits(self):
        space = cyclic_space(30)
        with self.assertRaises(ResourceExhausted):
            separated_set(space, space.all, 1, "exact")
        with self.assertRaises(ResourceExhausted):
            net(space, space.all, 1, "exact")
        with self.assertRaises(InputError):
            net(space, [0], 1, "fast")


class TestGroupConstructions(unittest.TestCase):
    def test_ruzsa_cover_in_discrete_group(self):
        space = discrete_space(5)
        self.assertEqual(ruzsa_cover(space, space.all, [0], 0.1), space.all)
        self.assertEqual(ruzsa_cover(space, space.all, space.all, 0.1), [0])
        with self.assertRaises(InputError):
            ruzsa_cover(space, space.all, [], 0.1)

    def test_subgroup_is_its_own_approximation(self):
        result = rough_approx_check(cyclic_space(12), [0, 4, 8], 1, 0)
        self.assertTrue(result.verified)
        self.assertEqual(result.translates, [0])

    def test_interval_needs_three_translates(self):
        space = cyclic_space(101)
        h = [98, 99, 100, 0, 1, 2, 3]
        result = rough_approx_check(space, h, 3, 0)
        self.assertTrue(result.verified)
        self.assertEqual(result.translates, [0, 3, 94])
        failed = rough_approx_check(space, h, 2, 0)
        self.assertFalse(failed.verified)
        self.assertTrue(failed.uncovered)
        self.assertEqual(failed.to_dict(space)["k"], 2)

    def test_empty_set_is_trivially_approximated(self):
        self.assertTrue(rough_approx_check(cyclic_space(5), [], 1, 0).verified)

    def test_popular_elements(self):
        space = cyclic_space(12)
        self.assertEqual(popular_elements(space, [0, 1, 2], 0.5, 0, 1), [0, 1, 2, 10, 11])
        self.assertEqual(popular_elements(space, [0, 1, 2], 0.5, 0, 3), [0])
        self.assertEqual(popular_elements(space, [0, 1, 2], 0.5, 1, 3, exhaustive=True), [0])
        self.assertEqual(popular_elements(space, [0, 1, 2], 0.5, 1, 4), [])
        self.assertEqual(popular_elements(space, [0, 1, 2], 0.5, 0, 2, symmetric=True), [0, 1, 11])

    def test_popular_elements_near_but_outside_the_difference_set(self):
        # A^-1 A = {0}; every point within 2.5 of it has the witness (0, 0)
        space = cyclic_space(12)
        self.assertEqual(popular_elements(space, [0], 2.5, 1.0, 1), [0, 1, 2, 10, 11])

    def test_rough_approximate_group_from_symmetric_set(self):
        result = getrag_check(cyclic_space(12), [11, 0, 1], 1, 1)
        self.assertEqual(result["constant"], "7/3")
        self.assertEqual(result["k"], 2)
        self.assertTrue(result["verified"])
        with self.assertRaises(InputError):
            getrag_check(cyclic_space(12), [0, 1], 1, 1)


class TestLemmaChecks(unittest.TestCase):
    def test_entropy_inequalities_on_z24(self):
        space = cyclic_space(24)
        for u in ([0, 1, 5, 9], list(range(0, 12, 2)), [0, 3, 4, 10, 11, 17, 20]):
            for eps in (2, 3):
                rows = lemma_checks(space, u, eps)
                names = [row["lemma"] for row in rows]
                self.assertIn("inverse_net", names)
                for row in rows:
                    self.assertTrue(row["ok"], row)

    def test_product_net_row_for_small_sets(self):
        rows = lemma_checks(cyclic_space(24), [0, 1, 5, 9], 2)
        self.assertIn("product_net", [row["lemma"] for row in rows])

    def test_ruzsa_triangle(self):
        rows = lemma_checks(cyclic_space(24), [0, 1, 2, 3], 2, v=[0, 5], w=[0, 5])
        triangle = next(row for row in rows if row["lemma"] == "ruzsa_triangle")
        self.assertEqual(triangle["lhs"], 6)
        self.assertEqual(triangle["rhs"], 64)
        self.assertTrue(triangle["ok"])

    def test_metric_without_group_skips_group_rows(self):
        space = euclidean_space([[0.0], [1.0], [2.5]])
        names = [row["lemma"] for row in lemma_checks(space, space.all, 1.0)]
        self.assertNotIn("inverse_net", names)

    def test_plunnecke(self):
        result = plunnecke_check(cyclic_space(24), [0, 1, 2, 3], 0.5, 2)
        self.assertEqual(result["constant"], "7/2")
        self.assertEqual(len(result["popular"]), 7)
        for row in result["checks"]:
            self.assertTrue(row["ok"], row)
        with self.assertRaises(InputError):
            plunnecke_check(cyclic_space(24), [0, 1], 1, 2)


if __name__ == '__main__':
    unittest.main()
