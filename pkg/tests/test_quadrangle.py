import unittest
import os
import sys

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from assoclab.exceptions import InputError, QuadrangleFailure, VerificationFailure
from assoclab.pls import cyclic, direct_product, fig1_instance, random_quasigroup, restrict_random, scramble
from assoclab.quadrangle import (
    QC_KINDS,
    are_isomorphic,
    brandt_reconstruct,
    check_group_table,
    check_quadrangle,
    check_quadrangle_brute,
    completion_defect,
    satisfies_quadrangle,
    verify_violation,
)


class TestQuadrangleCondition(unittest.TestCase):
    def test_group_tables_and_their_restrictions_pass(self):
        self.assertTrue(satisfies_quadrangle(cyclic(6)))
        self.assertTrue(satisfies_quadrangle(direct_product([2, 3])))
        for seed in range(5):
            self.assertTrue(satisfies_quadrangle(restrict_random(cyclic(7), 0.5, seed)))

    def test_fig1_has_one_label_violation(self):
        pls = fig1_instance()
        violations = check_quadrangle(pls, "label")
        self.assertEqual(len(violations), 1)
        self.assertEqual(violations[0].values, (3, 4))
        self.assertTrue(verify_violation(pls, violations[0]))
        self.assertEqual(check_quadrangle(pls, "row"), [])
        self.assertEqual(check_quadrangle(pls, "column"), [])
        self.assertFalse(satisfies_quadrangle(pls))

    def test_grouped_check_matches_lookup_oracle(self):
        for seed in range(4):
            pls = restrict_random(random_quasigroup(5, seed), 0.8, seed)
            for kind in QC_KINDS:
                fast = check_quadrangle(pls, kind)
                self.assertEqual(fast, check_quadrangle_brute(pls, kind))
                for violation in fast:
                    self.assertTrue(verify_violation(pls, violation))

    def test_tampered_violation_is_rejected(self):
        pls = fig1_instance()
        violation = check_quadrangle(pls, "label")[0]
        tampered = type(violation)(violation.kind, violation.cells, (4, 3))
        self.assertFalse(verify_violation(pls, tampered))
        self.assertFalse(verify_violation(cyclic(5), violation))

    def test_violation_serializes(self):
        data = check_quadrangle(fig1_instance(), "label")[0].to_dict()
        self.assertEqual(data["kind"], "label")
        self.assertEqual(len(data["cells"]), 8)

    def test_unknown_kind(self):
        with self.assertRaises(InputError):
            check_quadrangle(cyclic(3), "diagonal")


class TestCompletionDefect(unittest.TestCase):
    def test_groups_have_defect_one(self):
        for n in (3, 4, 5):
            for kind in QC_KINDS:
                self.assertEqual(completion_defect(cyclic(n), kind, 2), 1)
        self.assertEqual(completion_defect(cyclic(4), "label", 3), 1)

    def test_fig1_prefix_has_two_completions(self):
        value, histogram = completion_defect(fig1_instance(), "label", 2, verbose=True)
        self.assertEqual(value, 2)
        self.assertIn(2, histogram)

    def test_no_cycles_means_zero(self):
        empty = cyclic(3).restrict([])
        self.assertEqual(completion_defect(empty, "label", 2), 0)


class TestGroupReconstruction(unittest.TestCase):
    def test_cyclic_table_comes_back(self):
        group = brandt_reconstruct(cyclic(5))
        self.assertEqual(group.identity, 0)
        self.assertEqual(group.op(3, 4), 2)
        self.assertTrue(group.is_group())

    def test_scrambled_table_gives_isomorphic_group(self):
        for seed in range(3):
            group = brandt_reconstruct(scramble(cyclic(6), seed))
            self.assertTrue(group.is_group())
            self.assertTrue(are_isomorphic(group, brandt_reconstruct(cyclic(6))))

    def test_choice_of_row_and_column_does_not_matter(self):
        pls = scramble(direct_product([2, 2]), 5)
        base = brandt_reconstruct(pls)
        for row, column in ((1, 2), (3, 0), (2, 2)):
            self.assertTrue(are_isomorphic(base, brandt_reconstruct(pls, row, column)))

    def test_seeded_scrambles_of_small_groups(self):
        bases = [cyclic(n) for n in range(3, 9)] + [direct_product(o) for o in ([2, 2], [2, 3], [2, 4], [2, 2, 2])]
        for seed in range(20):
            pls = scramble(bases[seed % len(bases)], seed)
            n = pls.dims[0]
            group = brandt_reconstruct(pls)
            self.assertTrue(all(group.check().values()), seed)
            if n <= 6:
                other = brandt_reconstruct(pls, seed % n, (3 * seed + 1) % n)
                self.assertTrue(are_isomorphic(group, other), seed)

    def test_cyclic_and_klein_groups_differ(self):
        self.assertFalse(are_isomorphic(brandt_reconstruct(cyclic(4)), brandt_reconstruct(direct_product([2, 2]))))

    def test_non_quadrangle_square_fails(self):
        for seed in range(50):
            pls = random_quasigroup(6, seed)
            if check_quadrangle(pls, "label"):
                with self.assertRaises(QuadrangleFailure) as ctx:
                    brandt_reconstruct(pls)
                self.assertIsInstance(ctx.exception, VerificationFailure)
                break
        else:
            self.fail("no non-quadrangle square among the seeds")

    def test_partial_square_is_rejected(self):
        with self.assertRaises(InputError):
            brandt_reconstruct(restrict_random(cyclic(4), 0.5, 0))

    def test_group_table_checks(self):
        self.assertTrue(all(check_group_table([[0, 1], [1, 0]]).values()))
        # a Latin square with identity 0 that is not associative
        loop = [
            [0, 1, 2, 3, 4],
            [1, 0, 3, 4, 2],
            [2, 4, 0, 1, 3],
            [3, 2, 4, 0, 1],
            [4, 3, 1, 2, 0],
        ]
        checks = check_group_table(loop)
        self.assertTrue(checks["total"])
        self.assertTrue(checks["identity"])
        self.assertFalse(checks["associative"])
        self.assertFalse(check_group_table([[0, 5], [1, 0]])["total"])


if __name__ == '__main__':
    unittest.main()
