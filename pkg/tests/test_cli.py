#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
End-to-end tests for the weatherforge command line
"""

import io
import os
import sys
import json
import logging
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.logger import init_logger
from weather.imgcore import read_image, read_scalar_map, write_image
from weather.restore import valid_mask
from weatherforge import run
from tests.fixtures import depth_gradient, smooth_scene, write_dataset_config, write_pair


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.addCleanup(init_logger, logging.WARNING)
        self.settings = os.path.join(self.tmp.name, "settings.json")
        with open(self.settings, 'w', encoding='utf-8') as f:
            json.dump({'jobs': 1}, f)

    def path(self, *parts: str) -> str:
        return os.path.join(self.tmp.name, *parts)

    def invoke(self, *argv: str):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = run(["--settings", self.settings, *argv])
        return code, out.getvalue(), err.getvalue()


class TestUsage(CliTestCase):

    def test_no_command(self):
        code, _, _ = self.invoke()
        self.assertEqual(code, 2)

    def test_unknown_choice(self):
        code, _, err = self.invoke("eval", "--pred", "a", "--ref", "b", "--metric", "lpips")
        self.assertEqual(code, 2)
        self.assertIn("invalid choice", err)

    def test_oracle_needs_priors(self):
        clean = self.path("x.pfm")
        write_image(smooth_scene(16, 16), clean)
        code, _, err = self.invoke("restore", "--oracle", "--input", clean, "--out", self.path("r.png"))
        self.assertEqual(code, 2)
        self.assertIn("--meta", err)

    def test_restore_modes_exclusive(self):
        code, _, _ = self.invoke("restore", "--oracle", "--estimate", "--input", "a", "--out", "b")
        self.assertEqual(code, 2)


class TestCommands(CliTestCase):

    def test_attn_check(self):
        code, out, _ = self.invoke("attn-check")
        self.assertEqual(code, 0)
        self.assertIn("13/13 checks passed", out)

    def test_visibility_table(self):
        code, out, _ = self.invoke("visibility", "--focal-length", "2", "--drop-radius", "0.5",
                                   "--z", "1", "10", "500")
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertEqual(lines[0], "z1 = 2 m, z2 = 200 m")
        self.assertIn("CameraLimited", lines[2])
        self.assertIn("InverseDepthDecay", lines[3])
        self.assertTrue(lines[3].endswith("0.200000"))
        self.assertIn("AggregateScattering", lines[4])

    def test_visibility_bad_optics(self):
        code, _, err = self.invoke("visibility", "--focal-length", "0", "--drop-radius", "0.5", "--z", "1")
        self.assertEqual(code, 1)
        self.assertIn("focal length", err)

    def test_missing_input_file(self):
        code, _, err = self.invoke("restore", "--estimate", "--input", self.path("absent.png"),
                                   "--out", self.path("r.png"))
        self.assertEqual(code, 1)
        self.assertIn("absent.png", err)

    def test_degrade_then_oracle_restore(self):
        pair = write_pair(self.tmp.name, "scene", smooth_scene(48, 48, seed=4, grid=False), depth_gradient(48, 48))
        prefix = self.path("out", "s0")
        code, _, err = self.invoke("degrade", "--clean", pair.clean, "--depth", pair.depth, "--type", "rain",
                                   "--scattering", "--beta", "0.02", "--O", "0.9", "--out-prefix", prefix,
                                   "--format", "pfm", "--seed", "3")
        self.assertEqual(code, 0, err)
        with open(prefix + "_meta.json", 'r', encoding='utf-8') as f:
            meta = json.load(f)
        self.assertEqual(meta['weather_type'], "rain_haze")
        self.assertEqual(meta['params']['atmosphere']['beta'], 0.02)
        self.assertEqual(meta['params']['occlusion_O'], 0.9)

        restored_path = self.path("restored.pfm")
        code, out, err = self.invoke("restore", "--oracle", "--input", prefix + "_lq.pfm", "--meta", prefix + "_meta.json",
                                     "--t", prefix + "_t.pfm", "--alpha", prefix + "_alpha.pfm",
                                     "--out", restored_path)
        self.assertEqual(code, 0, err)
        self.assertIn(restored_path, out)

        t = read_scalar_map(prefix + "_t.pfm")
        alpha = read_scalar_map(prefix + "_alpha.pfm")
        mask = valid_mask(t, alpha)
        error = np.abs(read_image(restored_path) - read_image(prefix + "_gt.pfm"))[mask]
        self.assertLess(float(error.max()), 1e-4)

    def test_estimate_writes_priors(self):
        degraded = self.path("hazy.png")
        write_image(np.full((24, 24, 3), 0.6, dtype=np.float32), degraded)
        code, _, err = self.invoke("restore", "--estimate", "--input", degraded, "--out", self.path("clear.png"),
                                   "--priors-dir", self.path("priors"), "--bit-depth", "16")
        self.assertEqual(code, 0, err)
        for name in ("clear_t_est.pfm", "clear_alpha_est.pfm", "clear_priors.json"):
            self.assertTrue(os.path.isfile(self.path("priors", name)), name)
        with open(self.path("priors", "clear_priors.json"), 'r', encoding='utf-8') as f:
            self.assertEqual(set(json.load(f)), {'A', 'O'})

    def test_synth_and_eval(self):
        pair = write_pair(self.tmp.name, "scene", smooth_scene(24, 24), depth_gradient(24, 24))
        config = write_dataset_config(self.path("synth.json"), [pair], {'haze': 1, 'snow': 1},
                                      out_dir="dataset", image_format="pfm")
        code, out, err = self.invoke("synth", "--config", config, "--no-progress", "--jobs", "1")
        self.assertEqual(code, 0, err)
        self.assertIn("Generated 2 samples", out)

        dataset = self.path("dataset")
        pred, ref = self.path("pred"), self.path("ref")
        os.makedirs(pred)
        os.makedirs(ref)
        for name in ("00000", "00001"):
            write_image(read_image(os.path.join(dataset, f"{name}_lq.pfm")), os.path.join(pred, f"{name}.pfm"))
            write_image(read_image(os.path.join(dataset, f"{name}_gt.pfm")), os.path.join(ref, f"{name}.pfm"))

        code, out, err = self.invoke("eval", "--pred", pred, "--ref", ref, "--metric", "all", "--mode", "y")
        self.assertEqual(code, 0, err)
        lines = out.splitlines()
        self.assertEqual(lines[0], "name,metric,value")
        self.assertEqual(len(lines), 1 + 4 + 2)
        self.assertTrue(lines[-2].startswith("MEAN,psnr,"))

    def test_config_show_and_validate(self):
        code, out, _ = self.invoke("config", "show")
        self.assertEqual(code, 0)
        self.assertIn("jobs: 1", out)
        code, out, _ = self.invoke("config", "validate")
        self.assertEqual(code, 0)
        self.assertIn("Configuration is valid.", out)


if __name__ == "__main__":
    unittest.main(verbosity=2)
