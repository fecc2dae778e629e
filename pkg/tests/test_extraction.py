import unittest
from unittest.mock import patch
import os
import sys

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from assoclab.exceptions import InputError
from assoclab.extraction import (
    ExtractionTrace,
    auxiliary_graph,
    bipartite_from_pls,
    drs_bipartite,
    drs_cell_neighborhood,
    independent_prune,
    prune_indecomposable,
    qc_extract,
)
from assoclab.pls import PartialLatinSquare, cyclic, fig1_instance, restrict_random
from assoclab.quadrangle import satisfies_quadrangle
from assoclab.vankampen import PROVEN, DistanceResult


class TestQuadrangleExtraction(unittest.TestCase):
    def test_fig1_loses_one_slit_label(self):
        pls = fig1_instance()
        subset, trace = qc_extract(pls, stages=("independent",))
        self.assertEqual(len(subset), 7)
        self.assertNotIn((3, 3, 4), subset)
        self.assertTrue(satisfies_quadrangle(subset))
        self.assertTrue(trace.verified)
        self.assertEqual([s.name for s in trace.stages], ["input", "independent-prune"])

    def test_full_pipeline_on_fig1(self):
        pls = fig1_instance()
        subset, trace = qc_extract(pls, seed=1)
        self.assertTrue(set(subset.triples) <= set(pls.triples))
        self.assertTrue(satisfies_quadrangle(subset))
        self.assertTrue(trace.is_nested())
        self.assertTrue(trace.verified)

    def test_group_table_keeps_every_cell(self):
        subset, trace = qc_extract(cyclic(4))
        self.assertEqual(len(subset), 16)
        self.assertEqual(trace.stages[-1].defect, 1)

    def test_trace_round_trip(self):
        _, trace = qc_extract(fig1_instance())
        again = ExtractionTrace.from_dict(trace.to_dict())
        self.assertEqual(again.to_dict(), trace.to_dict())
        self.assertTrue(again.is_nested())

    def test_unknown_stage(self):
        with self.assertRaises(InputError):
            qc_extract(cyclic(3), stages=("drs", "shuffle"))


class TestStages(unittest.TestCase):
    def test_cell_selection_on_a_group_keeps_everything(self):
        subset, trace = drs_cell_neighborhood(cyclic(4), 0.5, 0.01)
        self.assertEqual(len(subset), 16)
        self.assertFalse(trace.stages[0].notes["objective_negative"])

    def test_cell_selection_is_seeded(self):
        pls = restrict_random(cyclic(5), 0.7, 2)
        a, _ = drs_cell_neighborhood(pls, 0.3, 0.01, seed=4, randomize=True)
        b, _ = drs_cell_neighborhood(pls, 0.3, 0.01, seed=4, randomize=True)
        self.assertEqual(a, b)

    def test_cell_selection_without_octahedra(self):
        empty = PartialLatinSquare((3, 3, 3), ())
        subset, trace = drs_cell_neighborhood(empty, 0.5, 0.1)
        self.assertEqual(len(subset), 0)
        self.assertEqual(trace.stages[0].notes["reason"], "no octahedra")

    def test_cell_selection_parameter_range(self):
        with self.assertRaises(InputError):
            drs_cell_neighborhood(cyclic(3), 1.5, 0.1)
        with self.assertRaises(InputError):
            drs_cell_neighborhood(cyclic(3), 0.5, 0.1, k=1)

    def test_pruning_everything(self):
        subset, trace = prune_indecomposable(cyclic(3), k=2, gamma=2.0)
        self.assertEqual(len(subset), 0)
        self.assertTrue(trace.verified)
        self.assertGreater(trace.stages[0].notes["removed_cells"], 0)

    def test_pruning_nothing(self):
        subset, _ = prune_indecomposable(cyclic(3), k=2, gamma=0.0)
        self.assertEqual(subset, cyclic(3))

    def test_auxiliary_graph_of_fig1(self):
        graph = auxiliary_graph(fig1_instance(), 2, 9)
        self.assertEqual(sorted(graph.nodes), [0, 1, 2, 3, 4])
        self.assertEqual(list(graph.edges), [(3, 4)])
        self.assertEqual(graph.edges[3, 4]["area"], 8)
        self.assertEqual(auxiliary_graph(fig1_instance(), 2, 8).number_of_edges(), 0)

    @patch("assoclab.extraction.vk_distance")
    def test_word_search_runs_below_the_slit_area(self, mock_distance):
        mock_distance.return_value = DistanceResult(PROVEN, 3, (((2, 0, 1),), ((2, 1, 1),)), budget=3, cap=11)
        graph = auxiliary_graph(fig1_instance(), 2, 4)
        self.assertEqual(mock_distance.call_count, 10)
        self.assertEqual(mock_distance.call_args[0][3], 3)
        self.assertEqual(graph.number_of_edges(), 10)
        self.assertEqual({area for _, _, area in graph.edges(data="area")}, {3})

    def test_independent_prune_area_bound(self):
        with self.assertRaises(InputError):
            independent_prune(fig1_instance(), b=1)


class TestBipartiteSelection(unittest.TestCase):
    def test_complete_bipartite_graph(self):
        selection = drs_bipartite(bipartite_from_pls(cyclic(4)), k=2)
        self.assertEqual(len(selection.left), 4)
        self.assertEqual(len(selection.right), 4)
        self.assertEqual(selection.stats["density"], 1.0)
        self.assertGreater(selection.stats["min_connectors"], 0)

    def test_empty_graph(self):
        selection = drs_bipartite(bipartite_from_pls(PartialLatinSquare((2, 2, 2), ())))
        self.assertEqual(selection.left, [])
        self.assertEqual(selection.stats["reason"], "no edges")


if __name__ == '__main__':
    unittest.main()
