import unittest
import os
import sys

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from assoclab.exceptions import InputError
from assoclab.pls import cyclic, direct_product, fig1_instance, scramble
from assoclab.vankampen import (
    CLASS_SEPARATED,
    EXACT_ZERO,
    NOT_FOUND,
    PROVEN,
    SLIT_AREA,
    STATE_LIMIT,
    DistanceResult,
    EmbeddingReport,
    build_presentation,
    class_signature,
    emit_embedding,
    format_word,
    inverse_word,
    parse_word,
    reduce_word,
    replay_certificate,
    slit_certificate,
    slit_scan,
    vk_distance,
)


class TestWords(unittest.TestCase):
    def setUp(self):
        self.pres = build_presentation(fig1_instance())

    def test_parse_uses_sidecar_names(self):
        word = parse_word(self.pres, "x1 y1 a^-1")
        self.assertEqual(word, ((0, 0, 1), (1, 0, 1), (2, 0, -1)))
        self.assertEqual(parse_word(self.pres, "x1*y1"), ((0, 0, 1), (1, 0, 1)))

    def test_parse_reduces(self):
        self.assertEqual(parse_word(self.pres, "d d^-1"), ())

    def test_format(self):
        self.assertEqual(format_word(self.pres, ((2, 3, 1), (2, 4, -1))), "d d2^-1")
        self.assertEqual(format_word(self.pres, ()), "1")

    def test_unknown_generator(self):
        with self.assertRaises(InputError):
            parse_word(self.pres, "w7")

    def test_free_reduction_and_inverse(self):
        word = ((0, 1, 1), (1, 2, 1), (1, 2, -1), (2, 0, -1))
        self.assertEqual(reduce_word(word), ((0, 1, 1), (2, 0, -1)))
        self.assertEqual(reduce_word(word + inverse_word(word)), ())

    def test_relators_have_zero_class_signature(self):
        for relator in self.pres.relators:
            self.assertEqual(class_signature(relator), (0, 0))


class TestDistance(unittest.TestCase):
    def test_fig1_labels_are_joined_within_area_eight(self):
        pres = build_presentation(fig1_instance())
        w1, w2 = parse_word(pres, "d"), parse_word(pres, "d2")
        result = vk_distance(pres, w1, w2, budget=8)
        self.assertEqual(result.status, PROVEN)
        self.assertLessEqual(result.area, 8)
        self.assertTrue(replay_certificate(pres, w1, w2, result))

    def test_equal_words(self):
        pres = build_presentation(fig1_instance())
        word = parse_word(pres, "x2 y2")
        result = vk_distance(pres, word, word)
        self.assertEqual(result.status, EXACT_ZERO)
        self.assertEqual(result.area, 0)
        self.assertTrue(replay_certificate(pres, word, word, result))

    def test_different_classes_never_meet(self):
        pres = build_presentation(fig1_instance())
        result = vk_distance(pres, parse_word(pres, "x1"), parse_word(pres, "d"))
        self.assertEqual(result.status, CLASS_SEPARATED)
        self.assertFalse(result.proven)

    def test_group_generators_stay_apart(self):
        pres = build_presentation(cyclic(3))
        result = vk_distance(pres, ((0, 0, 1),), ((0, 1, 1),), budget=4)
        self.assertEqual(result.status, NOT_FOUND)
        self.assertFalse(result.proven)
        self.assertIsNone(result.area)

    def test_group_images_separate_without_searching(self):
        pres = build_presentation(cyclic(4))
        result = vk_distance(pres, ((0, 0, 1),), ((0, 1, 1),), budget=11, max_states=10)
        self.assertEqual(result.status, NOT_FOUND)
        self.assertEqual(pres.evaluate(((0, 1, 1), (1, 2, 1))), pres.evaluate(((2, 3, 1),)))
        self.assertIsNone(build_presentation(fig1_instance()).group_images)

    def test_single_relator(self):
        pres = build_presentation(cyclic(3))
        result = vk_distance(pres, ((0, 1, 1), (1, 2, 1)), ((2, 0, 1),), budget=2)
        self.assertEqual(result.status, PROVEN)
        self.assertEqual(result.area, 1)

    def test_bad_budget_and_cap(self):
        pres = build_presentation(cyclic(2))
        with self.assertRaises(InputError):
            vk_distance(pres, ((0, 0, 1),), ((0, 1, 1),), budget=-1)
        with self.assertRaises(InputError):
            vk_distance(pres, ((0, 0, 1),), ((0, 1, 1),), cap=1)

    def test_forged_certificate_is_rejected(self):
        pres = build_presentation(fig1_instance())
        w1, w2 = parse_word(pres, "d"), parse_word(pres, "d2")
        forged = DistanceResult(PROVEN, 1, (w1, w2))
        self.assertFalse(replay_certificate(pres, w1, w2, forged))


class TestSlitOctahedra(unittest.TestCase):
    def test_fig1_scan_finds_the_label_pair(self):
        witnesses = slit_scan(fig1_instance())
        self.assertEqual([w.labels for w in witnesses], [(3, 4)])
        self.assertEqual(witnesses[0].triples[3], (1, 1, 3))
        self.assertEqual(witnesses[0].triples[7], (3, 3, 4))

    def test_groups_have_no_slits(self):
        self.assertEqual(slit_scan(cyclic(3)), [])

    def test_certificate_replays(self):
        pls = fig1_instance()
        pres = build_presentation(pls)
        witness = slit_scan(pls)[0]
        certificate = slit_certificate(witness)
        result = DistanceResult(PROVEN, SLIT_AREA, certificate)
        self.assertTrue(replay_certificate(pres, ((2, 3, 1),), ((2, 4, 1),), result))


class TestEmbedding(unittest.TestCase):
    def test_fig1_is_not_separated_above_the_slit_area(self):
        report = emit_embedding(fig1_instance(), budget=10, max_states=500)
        self.assertFalse(report.certified)
        self.assertEqual(len(report.triple_certificates), 8)
        self.assertIn(["d", "d2"], [entry["pair"] for entry in report.offending])
        data = report.to_dict()
        self.assertEqual(data["resolution"]["budget"], 10)
        self.assertEqual(set(data["maps"]), {"phi", "psi", "omega"})

    def test_group_table_embeds(self):
        report = emit_embedding(cyclic(2), budget=3, max_states=500, threads=2)
        self.assertTrue(report.certified)
        self.assertEqual(len(report.separation), 3)

    def test_cyclic_four_at_budget_twelve(self):
        report = emit_embedding(cyclic(4), budget=12)
        self.assertEqual(len(report.separation), 18)
        self.assertTrue(all(entry["status"] == NOT_FOUND for entry in report.separation))
        self.assertTrue(report.complete)
        self.assertTrue(report.certified)

    def test_scrambled_product_embeds(self):
        report = emit_embedding(scramble(direct_product([2, 2]), 3), budget=12)
        self.assertTrue(all(entry["status"] == NOT_FOUND for entry in report.separation))
        self.assertTrue(report.certified)

    def test_state_limit_is_not_certified(self):
        entry = {"class": "x", "pair": ["x0", "x1"], "status": STATE_LIMIT, "area": None}
        report = EmbeddingReport(3, 8, {}, [], [entry])
        self.assertFalse(report.complete)
        self.assertFalse(report.certified)
        self.assertFalse(report.to_dict()["certified_1_separated"])

    def test_budget_must_be_positive(self):
        with self.assertRaises(InputError):
            emit_embedding(cyclic(2), budget=0)


if __name__ == '__main__':
    unittest.main()
