import math
import unittest
import os
import sys

import numpy as np

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from assoclab.exceptions import InputError, ResourceExhausted
from assoclab.so3 import (
    IDENTITY,
    RotationNet,
    axis_angle,
    ball_volume,
    ball_volume_mc,
    build_net,
    fuzzy_op,
    nearest_in_net,
    normalize,
    popular_products,
    quat_inverse,
    quat_multiply,
    random_rotations,
    rotation_distance,
    verify_corollaries,
    verify_density,
)


class TestQuaternions(unittest.TestCase):
    def test_axis_angle_distance(self):
        q = axis_angle([0, 0, 1], 0.7)
        self.assertAlmostEqual(float(rotation_distance(IDENTITY, q)), 0.7)
        # a turn by 2pi - a is a turn by a the other way
        self.assertAlmostEqual(float(rotation_distance(IDENTITY, axis_angle([1, 0, 0], 2 * math.pi - 0.3))), 0.3)

    def test_same_axis_rotations_compose(self):
        q = quat_multiply(axis_angle([1, 1, 0], 0.4), axis_angle([1, 1, 0], 0.5))
        self.assertAlmostEqual(float(rotation_distance(q, axis_angle([1, 1, 0], 0.9))), 0.0, places=6)

    def test_inverse(self):
        q = axis_angle([0.2, -1, 3], 2.1)
        self.assertAlmostEqual(float(rotation_distance(quat_multiply(q, quat_inverse(q)), IDENTITY)), 0.0, places=6)

    def test_distance_is_bi_invariant(self):
        rng = np.random.default_rng(5)
        p, q, g = random_rotations(3, rng)
        base = float(rotation_distance(p, q))
        self.assertAlmostEqual(float(rotation_distance(quat_multiply(g, p), quat_multiply(g, q))), base, places=6)
        self.assertAlmostEqual(float(rotation_distance(quat_multiply(p, g), quat_multiply(q, g))), base, places=6)

    def test_zero_quaternion(self):
        with self.assertRaises(InputError):
            normalize(np.zeros(4))
        with self.assertRaises(InputError):
            axis_angle([0, 0, 0], 1.0)

    def test_ball_volume(self):
        self.assertEqual(ball_volume(0.0), 0.0)
        self.assertAlmostEqual(ball_volume(math.pi), 1.0)
        self.assertAlmostEqual(ball_volume_mc(1.0), ball_volume(1.0), delta=0.003)


class TestNets(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.delta = 0.6
        cls.net = build_net(cls.delta, seed=11, budget=2000)

    def test_net_is_separated(self):
        self.assertGreaterEqual(self.net.min_separation(), self.delta - 1e-9)

    def test_net_size_within_volume_bounds(self):
        lower = 1 / ball_volume(2 * self.delta)
        upper = 1 / ball_volume(self.delta / 2)
        self.assertGreaterEqual(len(self.net), math.floor(lower))
        self.assertLessEqual(len(self.net), math.ceil(upper))

    def test_net_is_seeded(self):
        again = build_net(self.delta, seed=11, budget=2000)
        self.assertTrue(np.array_equal(again.points, self.net.points))
        self.assertEqual(self.net.evidence, 2000)

    def test_dict_round_trip(self):
        again = RotationNet.from_dict(self.net.to_dict())
        self.assertTrue(np.allclose(again.points, self.net.points))
        self.assertEqual(again.delta, self.delta)
        self.assertEqual(again.seed, 11)
        with self.assertRaises(InputError):
            RotationNet.from_dict({"points": []})

    def test_nearest_point_of_a_net_point_is_itself(self):
        index, dist = nearest_in_net(self.net, self.net.points[:20])
        self.assertEqual(index.tolist(), list(range(20)))
        self.assertTrue(np.all(dist < 1e-6))

    def test_density_bound(self):
        self.assertTrue(verify_density(self.net, 0.4)["pass"])

    def test_invalid_delta(self):
        with self.assertRaises(InputError):
            build_net(0.0)
        with self.assertRaises(InputError):
            build_net(4.0)

    def test_point_limit(self):
        with self.assertRaises(ResourceExhausted):
            build_net(0.3, budget=100, max_points=5)


class TestFuzzyProduct(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.net = build_net(1.0, seed=3, budget=1000)

    def test_product_is_a_partial_latin_square(self):
        op = fuzzy_op(self.net, 0.4)
        self.assertEqual(op.n, len(self.net))
        rows = {}
        for (x, y), z in op.table.items():
            self.assertNotIn((x, z), rows)
            rows[(x, z)] = y

    def test_popular_counts_match_defined_pairs(self):
        op = fuzzy_op(self.net, 0.3)
        counts = popular_products(self.net, 0.3)["counts"]
        self.assertEqual(len(counts), len(self.net))
        self.assertEqual(sum(counts), len(op.table))

    def test_theta_range(self):
        with self.assertRaises(InputError):
            fuzzy_op(self.net, 0.5)
        with self.assertRaises(InputError):
            fuzzy_op(self.net, 0.0)

    def test_corollary_rows(self):
        rows = verify_corollaries(self.net, 0.4, 0.5, max_triples=10 ** 9)
        self.assertEqual([r["metric"] for r in rows], ["partners_fraction", "associative_triples", "popular_products_fraction"])
        self.assertFalse(rows[1]["estimated"])
        sampled = verify_corollaries(self.net, 0.4, 0.5, max_triples=1000, seed=2)
        self.assertTrue(sampled[1]["estimated"])
        with self.assertRaises(InputError):
            verify_corollaries(self.net, 0.4, 1.0)

    def test_identity_net_passes_everything(self):
        net = RotationNet(IDENTITY[None, :].copy(), 0.5)
        rows = verify_corollaries(net, 0.4, 0.5)
        self.assertTrue(all(row["pass"] for row in rows))
        self.assertEqual(fuzzy_op(net, 0.4).table, {(0, 0): 0})


class TestFineNet(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.net = build_net(0.45, seed=13)

    def test_net_is_separated(self):
        self.assertGreater(len(self.net), 100)
        self.assertGreaterEqual(self.net.min_separation(), 0.45 - 1e-9)

    def test_density_at_theta_point_nine(self):
        row = verify_density(self.net, 0.9)
        self.assertTrue(row["pass"], row)

    def test_corollaries_at_theta_point_nine(self):
        rows = verify_corollaries(self.net, 0.9, 0.1, seed=13)
        self.assertEqual(len(rows), 3)
        for row in rows:
            self.assertTrue(row["pass"], row)


if __name__ == '__main__':
    unittest.main()
