#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for toolkit settings and the configuration manager
"""

import io
import os
import sys
import json
import tempfile
import unittest
from contextlib import redirect_stdout

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config_manager import print_warnings, reset_config, show_config, validate_config, validate_dataset_config
from forge_config import ToolkitConfig, get_toolkit_config
from weather.dataset_config import InputPair
from weather.errors import ConfigError
from tests.fixtures import depth_gradient, smooth_scene, write_dataset_config, write_pair


class TestToolkitConfig(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = os.path.join(self.tmp.name, "config.json")

    def test_defaults(self):
        config = ToolkitConfig()
        self.assertEqual((config.t_min, config.alpha_max), (0.05, 0.95))
        self.assertEqual((config.dark_patch, config.omega, config.top_frac), (15, 0.95, 0.001))
        self.assertEqual((config.bright_thresh, config.size_max), (0.08, 4000))
        settings = config.estimator_settings()
        self.assertEqual(settings.dark_patch, 15)
        self.assertEqual(settings.t_min, 0.05)

    def test_save_and_load(self):
        ToolkitConfig(omega=0.9, jobs=3).save_to_file(self.path)
        loaded = ToolkitConfig.load_from_file(self.path)
        self.assertEqual(loaded.omega, 0.9)
        self.assertEqual(loaded.jobs, 3)

    def test_unknown_keys_ignored(self):
        with open(self.path, 'w', encoding='utf-8') as f:
            json.dump({'omega': 0.85, 'fullscreen': True}, f)
        self.assertEqual(ToolkitConfig.load_from_file(self.path).omega, 0.85)

    def test_reset_writes_defaults(self):
        ToolkitConfig(omega=0.7).save_to_file(self.path)
        with redirect_stdout(io.StringIO()):
            reset_config(self.path)
        self.assertEqual(ToolkitConfig.load_from_file(self.path), ToolkitConfig())

    def test_global_instance(self):
        ToolkitConfig(jobs=5).save_to_file(self.path)
        first = get_toolkit_config(self.path)
        self.assertEqual(first.jobs, 5)
        self.assertIs(get_toolkit_config(), first)

    def test_broken_file_gives_defaults(self):
        with open(self.path, 'w', encoding='utf-8') as f:
            f.write("{oops")
        self.assertEqual(ToolkitConfig.load_from_file(self.path), ToolkitConfig())
        self.assertEqual(ToolkitConfig.load_from_file(os.path.join(self.tmp.name, "none.json")), ToolkitConfig())


class TestValidation(unittest.TestCase):

    def test_default_config_is_clean(self):
        self.assertEqual(validate_config(ToolkitConfig()), [])

    def test_soft_warnings(self):
        warnings = validate_config(ToolkitConfig(t_min=0.3, omega=0.5))
        self.assertEqual(len(warnings), 2)
        self.assertTrue(any("t_min" in w for w in warnings))

    def test_hard_errors(self):
        for bad in (ToolkitConfig(dark_patch=8), ToolkitConfig(window=0), ToolkitConfig(jobs=-1),
                    ToolkitConfig(alpha_max=1.0)):
            with self.assertRaises(ConfigError):
                validate_config(bad)

    def test_dataset_document(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        pair = write_pair(tmp.name, "s", smooth_scene(16, 16), depth_gradient(16, 16))
        missing = InputPair(os.path.join(tmp.name, "gone.png"), os.path.join(tmp.name, "gone.png"))
        path = write_dataset_config(os.path.join(tmp.name, "synth.json"), [pair, missing], {'rain': 2},
                                    image_format="png8")
        config, warnings = validate_dataset_config(path)
        self.assertEqual(config.total_samples, 2)
        self.assertEqual(sum("missing file" in w for w in warnings), 2)
        self.assertTrue(any("not a PFM" in w for w in warnings))
        self.assertTrue(any("8-bit PNG" in w for w in warnings))

    def test_dataset_document_errors(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        path = write_dataset_config(os.path.join(tmp.name, "synth.json"), [], {'haze': 1})
        with self.assertRaises(ConfigError):
            validate_dataset_config(path)


class TestDisplay(unittest.TestCase):

    def test_show_config(self):
        out = io.StringIO()
        show_config(ToolkitConfig(), out)
        text = out.getvalue()
        self.assertTrue(text.startswith("Current configuration:"))
        self.assertIn("  dark_patch: 15\n", text)

    def test_print_warnings(self):
        out = io.StringIO()
        print_warnings([], out)
        self.assertEqual(out.getvalue(), "Configuration is valid.\n")
        out = io.StringIO()
        print_warnings(["a"], out)
        self.assertEqual(out.getvalue(), "Configuration warnings:\n  - a\n")


if __name__ == "__main__":
    unittest.main(verbosity=2)
