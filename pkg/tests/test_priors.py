#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for the classical prior estimators
"""

import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from weather.errors import ConfigError, ShapeError
from weather.occlusion import VolumetricConfig
from weather.priors import (
    EstimatorSettings, dark_channel, estimate_atmospheric_light, estimate_occlusion, estimate_transmission
)
from weather.synth import WeatherType, sample_weather_params, synthesize_sample
from tests.fixtures import SKY_ROWS, explicit_params, haze_scene, rain_layer, smooth_scene


class TestDarkChannel(unittest.TestCase):

    def test_constant_image(self):
        img = np.empty((9, 9, 3), dtype=np.float32)
        img[...] = (0.7, 0.4, 0.6)
        np.testing.assert_allclose(dark_channel(img, 3), 0.4)

    def test_dark_pixel_spreads_over_patch(self):
        img = np.ones((9, 9, 3), dtype=np.float32)
        img[4, 4, 1] = 0.0
        dc = dark_channel(img, 3)
        expected = np.ones((9, 9), dtype=np.float32)
        expected[3:6, 3:6] = 0.0
        np.testing.assert_array_equal(dc, expected)

    def test_windows_are_cropped_at_borders(self):
        img = np.ones((9, 9, 3), dtype=np.float32)
        img[0, 0] = 0.0
        dc = dark_channel(img, 5)
        self.assertEqual(float(dc[2, 2]), 0.0)
        self.assertEqual(float(dc[3, 3]), 1.0)

    def test_grid_scene_is_dark(self):
        self.assertFalse(dark_channel(smooth_scene(40, 40)).any())

    def test_matches_brute_force_windows(self):
        img = np.random.default_rng(11).random((8, 8, 3)).astype(np.float32)
        expected = np.empty((8, 8), dtype=np.float32)
        for r in range(8):
            for c in range(8):
                expected[r, c] = img[max(r - 1, 0):r + 2, max(c - 1, 0):c + 2].min()
        np.testing.assert_array_equal(dark_channel(img, 3), expected)

    def test_monotone_in_brightness(self):
        img = np.random.default_rng(12).random((16, 16, 3)).astype(np.float32) * 0.8
        brighter = img + np.random.default_rng(13).random((16, 16, 3)).astype(np.float32) * 0.2
        self.assertTrue(np.all(dark_channel(brighter, 5) >= dark_channel(img, 5)))

    def test_even_patch(self):
        with self.assertRaises(ConfigError):
            dark_channel(np.ones((4, 4, 3), dtype=np.float32), 4)


class TestAtmosphericLight(unittest.TestCase):

    def test_brightest_dark_channel_region(self):
        img = np.full((20, 20, 3), 0.2, dtype=np.float32)
        img[:2, :2] = (0.9, 0.8, 0.85)
        dc = dark_channel(img, 1)
        # 0.01 * 400 = 4 пикселя
        self.assertAlmostEqual(estimate_atmospheric_light(img, dc, 0.01), 0.85, places=6)

    def test_ties_broken_by_pixel_index(self):
        img = np.zeros((4, 4, 3), dtype=np.float32)
        img[..., 0] = np.arange(16, dtype=np.float32).reshape(4, 4) / 16.0
        dc = dark_channel(img, 1)
        self.assertFalse(dc.any())
        self.assertEqual(estimate_atmospheric_light(img, dc, 0.01), 0.0)
        self.assertAlmostEqual(estimate_atmospheric_light(img, dc, 0.125), (1 / 16) / 3 / 2, places=7)

    def test_invalid_fraction(self):
        img = np.zeros((4, 4, 3), dtype=np.float32)
        with self.assertRaises(ConfigError):
            estimate_atmospheric_light(img, dark_channel(img, 1), 0.0)


class TestTransmission(unittest.TestCase):

    def test_uniform_haze_over_black(self):
        # J = 0, t = 0.5, A = 0.9  ->  B = 0.45
        B = np.full((16, 16, 3), 0.45, dtype=np.float32)
        t = estimate_transmission(B, 0.9, omega=0.95, patch=5)
        np.testing.assert_allclose(t, 1.0 - 0.95 * 0.5, atol=1e-6)

    def test_clamped_to_t_min(self):
        B = np.full((8, 8, 3), 0.8, dtype=np.float32)
        t = estimate_transmission(B, 0.8, omega=1.0, patch=3, t_min=0.1)
        np.testing.assert_allclose(t, 0.1, atol=1e-7)

    def test_haze_free_scene_is_clear(self):
        t = estimate_transmission(smooth_scene(48, 48), 0.9)
        self.assertTrue(np.all(t == 1.0))

    def test_requires_positive_light(self):
        with self.assertRaises(ConfigError):
            estimate_transmission(np.ones((4, 4, 3), dtype=np.float32), 0.0)


class TestOcclusionEstimate(unittest.TestCase):

    def setUp(self):
        self.img = np.full((24, 24, 3), 0.1, dtype=np.float32)
        self.img[8:13, 10] = 0.9

    def test_bright_streak_detected(self):
        occ = estimate_occlusion(self.img)
        self.assertAlmostEqual(occ.brightness, 0.9, places=5)
        np.testing.assert_allclose(occ.alpha[8:13, 10], 1.0, atol=1e-5)
        outside = occ.alpha.copy()
        outside[8:13, 10] = 0.0
        self.assertFalse(outside.any())

    def test_large_components_are_background(self):
        occ = estimate_occlusion(self.img, size_max=3)
        self.assertFalse(occ.alpha.any())
        self.assertEqual(occ.brightness, 1.0)

    def test_clean_scene_has_no_occlusion(self):
        self.assertFalse(estimate_occlusion(smooth_scene(64, 64, grid=False)).alpha.any())

    def test_grid_scenes_have_no_occlusion(self):
        # Тёмная сетка не должна занижать фон на краях и пересечениях
        for seed in range(10):
            self.assertFalse(estimate_occlusion(smooth_scene(64, 64, seed=seed)).alpha.any(), seed)

    def test_uniform_white_has_no_occlusion(self):
        self.assertFalse(estimate_occlusion(np.ones((20, 20, 3), dtype=np.float32)).alpha.any())

    def test_haze_lowers_the_threshold(self):
        # Контраст 0.05: ниже порога 0.08, но выше 0.08 * median(t) = 0.04
        img = np.full((24, 24, 3), 0.6, dtype=np.float32)
        img[8:13, 10] = 0.65
        self.assertFalse(estimate_occlusion(img).alpha.any())
        t = np.full((24, 24), 0.5, dtype=np.float32)
        occ = estimate_occlusion(img, transmission=t)
        self.assertTrue(np.all(occ.alpha[8:13, 10] > 0.0))
        with self.assertRaises(ShapeError):
            estimate_occlusion(img, transmission=t[:10])

    def test_settings_validation(self):
        with self.assertRaises(ConfigError):
            EstimatorSettings(dark_patch=14)
        with self.assertRaises(ConfigError):
            EstimatorSettings(alpha_max=1.0)
        with self.assertRaises(ConfigError):
            EstimatorSettings(size_max=0)


def dark_rain_scene(seed: int):
    """Haze scene with the ground darkened to [0.05, 0.45] so that particles stand out"""
    scene, depth = haze_scene(64, 64, seed=seed)
    scene[SKY_ROWS:] *= 0.5
    return scene, depth


def rain_volume(beta: float) -> VolumetricConfig:
    return VolumetricConfig((rain_layer(7, density=800.0, near=True),),
                            (rain_layer(8, density=1500.0), rain_layer(9, density=1500.0)), beta)


def occlusion_recall(alpha_true: np.ndarray, alpha_est: np.ndarray, level: float = 0.3) -> float:
    marked = alpha_true > level
    return float(np.mean(alpha_est[marked] > 0.0))


class TestEstimatesOnSynthesizedSamples(unittest.TestCase):

    def haze_samples(self, count: int = 20):
        for index in range(count):
            scene, depth = haze_scene(64, 64, seed=index)
            yield synthesize_sample(scene, depth, sample_weather_params(31, index, WeatherType.HAZE))

    def test_atmospheric_light_within_tenth(self):
        for sample in self.haze_samples():
            dc = dark_channel(sample.degraded)
            A = estimate_atmospheric_light(sample.degraded, dc)
            self.assertLessEqual(abs(A - sample.params.atmosphere.A), 0.1)

    def test_transmission_mean_error(self):
        for sample in self.haze_samples():
            A = estimate_atmospheric_light(sample.degraded, dark_channel(sample.degraded))
            t_hat = estimate_transmission(sample.degraded, A)
            self.assertLessEqual(float(np.mean(np.abs(t_hat - sample.transmission))), 0.15)

    def test_rain_recall(self):
        for seed in range(3):
            scene, depth = dark_rain_scene(seed)
            sample = synthesize_sample(scene, depth, explicit_params(WeatherType.RAIN, beta=0.02, O=0.95,
                                                                     volumetric=rain_volume(0.02)))
            self.assertGreaterEqual(int(np.sum(sample.alpha > 0.3)), 30)
            occ = estimate_occlusion(sample.degraded)
            self.assertGreaterEqual(occlusion_recall(sample.alpha, occ.alpha), 0.5, seed)

    def test_hazy_rain_recall(self):
        for seed in range(3):
            scene, depth = dark_rain_scene(seed)
            sample = synthesize_sample(scene, depth, explicit_params(WeatherType.RAIN_HAZE, beta=0.01, O=0.95,
                                                                     volumetric=rain_volume(0.01)))
            I = sample.degraded
            A = estimate_atmospheric_light(I, dark_channel(I))
            occ = estimate_occlusion(I, transmission=estimate_transmission(I, A))
            self.assertGreaterEqual(occlusion_recall(sample.alpha, occ.alpha), 0.5, seed)


if __name__ == "__main__":
    unittest.main(verbosity=2)
