#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for the synth JSON document and sampled ranges
"""

import os
import sys
import json
import tempfile
import unittest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from weather.dataset_config import DatasetConfig, InputPair, SamplingRanges
from weather.errors import ConfigError


class TestSamplingRanges(unittest.TestCase):

    def test_defaults(self):
        ranges = SamplingRanges()
        self.assertEqual(ranges.beta, (0.005, 0.03))
        self.assertEqual(ranges.A, (0.75, 1.0))
        self.assertEqual(ranges.far_layers, 4)
        self.assertEqual(ranges.near_layers, 1)

    def test_lists_become_tuples(self):
        self.assertEqual(SamplingRanges(beta=[0.01, 0.02]).beta, (0.01, 0.02))

    def test_inverted_range(self):
        with self.assertRaises(ConfigError):
            SamplingRanges(A=(0.9, 0.8))

    def test_out_of_domain_range(self):
        with self.assertRaises(ConfigError):
            SamplingRanges(gamma=(0.5, 2.0))
        with self.assertRaises(ConfigError):
            SamplingRanges(snow_radius_far=(0.0, 1.0))

    def test_streak_width_must_not_exceed_length(self):
        with self.assertRaises(ConfigError):
            SamplingRanges(rain_width_far=(1.0, 10.0))

    def test_unknown_key(self):
        with self.assertRaises(ConfigError):
            SamplingRanges.from_dict({'betta': [0.01, 0.02]})


class TestDatasetConfig(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, document) -> str:
        path = os.path.join(self.tmp.name, "synth.json")
        with open(path, 'w', encoding='utf-8') as f:
            if isinstance(document, str):
                f.write(document)
            else:
                json.dump(document, f)
        return path

    def test_relative_paths_resolved_against_config(self):
        path = self.write({
            'inputs': [{'clean': 'img/a.png', 'depth': 'img/a.pfm'}],
            'counts': {'haze': 2},
            'out_dir': 'out',
        })
        config = DatasetConfig.load_from_file(path)
        self.assertEqual(config.inputs[0], InputPair(os.path.join(self.tmp.name, 'img/a.png'),
                                                     os.path.join(self.tmp.name, 'img/a.pfm')))
        self.assertEqual(config.out_dir, os.path.join(self.tmp.name, 'out'))
        self.assertEqual(config.counts, {'haze': 2, 'rain': 0, 'snow': 0})
        self.assertEqual(config.total_samples, 2)

    def test_ranges_overrides(self):
        path = self.write({'ranges': {'beta': [0.01, 0.01], 'far_layers': 2}})
        config = DatasetConfig.load_from_file(path)
        self.assertEqual(config.ranges.beta, (0.01, 0.01))
        self.assertEqual(config.ranges.far_layers, 2)
        self.assertEqual(config.ranges.A, (0.75, 1.0))

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            DatasetConfig.load_from_file(os.path.join(self.tmp.name, "absent.json"))

    def test_invalid_json(self):
        with self.assertRaises(ConfigError):
            DatasetConfig.load_from_file(self.write("{not json"))

    def test_unknown_keys(self):
        with self.assertRaises(ConfigError):
            DatasetConfig.load_from_file(self.write({'seeds': 3}))
        with self.assertRaises(ConfigError):
            DatasetConfig.from_dict({'counts': {'fog': 1}})

    def test_value_validation(self):
        with self.assertRaises(ConfigError):
            DatasetConfig(image_format="jpeg")
        with self.assertRaises(ConfigError):
            DatasetConfig(test_fraction=1.5)
        with self.assertRaises(ConfigError):
            DatasetConfig(counts={'rain': -1})
        with self.assertRaises(ConfigError):
            DatasetConfig(counts={'rain': 1})
        with self.assertRaises(ConfigError):
            DatasetConfig(inputs=[{'clean': 'a.png'}])

    def test_with_seed_keeps_everything_else(self):
        config = DatasetConfig(inputs=[InputPair('a', 'b')], counts={'snow': 3}, seed=1, image_format="pfm")
        other = config.with_seed(99)
        self.assertEqual(other.seed, 99)
        self.assertEqual(other.to_dict()['counts'], config.to_dict()['counts'])
        self.assertEqual(other.image_format, "pfm")

    def test_save_and_reload(self):
        config = DatasetConfig(inputs=[InputPair('/x/a.png', '/x/a.pfm')], counts={'rain': 4}, seed=3,
                               out_dir='/x/out', pfm_sidecars=True)
        path = os.path.join(self.tmp.name, "saved.json")
        config.save_to_file(path)
        self.assertEqual(DatasetConfig.load_from_file(path).to_dict(), config.to_dict())


if __name__ == "__main__":
    unittest.main(verbosity=2)
