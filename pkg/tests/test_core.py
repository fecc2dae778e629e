import json
import unittest
from unittest.mock import patch
import os
import sys
import tempfile
from fractions import Fraction

import numpy as np

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from assoclab.__version__ import __version__
from assoclab.core import (
    DEFAULT_STATE_BUDGET,
    RunConfig,
    get_default_budget,
    get_default_threads,
    load_instance,
    parse_index_set,
    read_json,
    save_instance,
    to_jsonable,
    write_artifact,
    write_csv,
)
from assoclab.exceptions import InputError
from assoclab.pls import cyclic, fig1_instance


class TestEnvironmentDefaults(unittest.TestCase):
    @patch.dict(os.environ, {}, clear=True)
    def test_defaults_without_environment(self):
        self.assertEqual(get_default_threads(), 1)
        self.assertEqual(get_default_budget(), DEFAULT_STATE_BUDGET)

    @patch.dict(os.environ, {"ASSOCLAB_THREADS": "4", "ASSOCLAB_BUDGET": "1e5"})
    def test_values_from_environment(self):
        self.assertEqual(get_default_threads(), 4)
        self.assertEqual(get_default_budget(), 100000)

    @patch.dict(os.environ, {"ASSOCLAB_THREADS": "many", "ASSOCLAB_BUDGET": "lots"})
    def test_malformed_environment(self):
        with self.assertRaises(InputError):
            get_default_threads()
        with self.assertRaises(InputError):
            get_default_budget()


class TestRunConfig(unittest.TestCase):
    def test_round_trip(self):
        config = RunConfig("vk", "dist", gen="cyclic:3", seed=7, params={"w1": "x0", "area": 4})
        again = RunConfig.from_dict(config.to_dict())
        self.assertEqual(again, config)

    def test_unknown_keys_are_ignored(self):
        config = RunConfig.from_dict({"command": "gen", "gen": "cyclic:2", "colour": "blue"})
        self.assertEqual(config.command, "gen")
        self.assertEqual(config.budget, DEFAULT_STATE_BUDGET)

    def test_missing_command(self):
        with self.assertRaises(InputError):
            RunConfig.from_dict({"action": "check"})


class TestJsonHelpers(unittest.TestCase):
    def test_to_jsonable(self):
        data = {
            "ratio": Fraction(7, 3),
            "whole": Fraction(4, 2),
            "array": np.arange(3),
            "flag": np.bool_(True),
            "pair": (np.int64(1), np.float64(0.5)),
            "set": {3, 1},
        }
        self.assertEqual(to_jsonable(data), {
            "ratio": "7/3",
            "whole": 2,
            "array": [0, 1, 2],
            "flag": True,
            "pair": [1, 0.5],
            "set": [1, 3],
        })
        json.dumps(to_jsonable(data))

    def test_parse_index_set(self):
        self.assertEqual(parse_index_set("0,1,5"), [0, 1, 5])
        self.assertEqual(parse_index_set("range:2:5"), [2, 3, 4])
        self.assertEqual(parse_index_set("  "), [])
        with self.assertRaises(InputError):
            parse_index_set("1,two")
        with self.assertRaises(InputError):
            parse_index_set("range:1")


class TestFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_save_and_load_instance(self):
        save_instance(fig1_instance(), self.path("fig1.json"))
        self.assertEqual(load_instance(self.path("fig1.json")), fig1_instance())

    def test_load_from_generator(self):
        self.assertEqual(load_instance(gen="cyclic:3"), cyclic(3))

    def test_load_needs_exactly_one_source(self):
        with self.assertRaises(InputError):
            load_instance()
        with self.assertRaises(InputError):
            load_instance(self.path("a.json"), "cyclic:3")

    def test_missing_and_invalid_files(self):
        with self.assertRaises(InputError):
            read_json(self.path("missing.json"))
        with open(self.path("bad.json"), "w") as f:
            f.write("{not json")
        with self.assertRaises(InputError):
            load_instance(self.path("bad.json"))
        with open(self.path("list.json"), "w") as f:
            f.write("[1, 2]")
        with self.assertRaises(InputError):
            load_instance(self.path("list.json"))

    def test_artifact_wraps_an_instance(self):
        config = RunConfig("gen", gen="cyclic:2")
        payload = write_artifact(self.path("out/z2.json"), config, cyclic(2).to_dict())
        self.assertEqual(payload["version"], __version__)
        self.assertEqual(payload["config"]["command"], "gen")
        self.assertEqual(load_instance(self.path("out/z2.json")), cyclic(2))

    def test_csv_sidecar(self):
        config = RunConfig("count", "octahedra", gen="cyclic:2")
        meta = write_csv(self.path("counts.csv"), ("metric", "value"), [("octahedra", 32)], config)
        self.assertEqual(meta, self.path("counts.csv") + ".meta.json")
        with open(self.path("counts.csv")) as f:
            self.assertEqual(f.read().splitlines(), ["metric,value", "octahedra,32"])
        sidecar = read_json(meta)
        self.assertEqual(sidecar["columns"], ["metric", "value"])
        self.assertEqual(sidecar["config"]["action"], "octahedra")


if __name__ == '__main__':
    unittest.main()
