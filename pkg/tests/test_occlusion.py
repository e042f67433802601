#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for visibility regimes, volumetric alpha and occlusion compositing
"""

import os
import sys
import unittest

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from weather.errors import ConfigError, DomainError, ShapeError
from weather.occlusion import (
    OcclusionField, VisibilityParams, VisibilityRegime, VolumetricConfig, combine_alpha, far_weight,
    occlusion_composite, occlusion_invert, particle_visibility, render_layers, visibility_regime,
    volumetric_alpha
)
from tests.fixtures import depth_gradient, rain_layer, smooth_scene


class TestVisibility(unittest.TestCase):
    """f = 2, a = 0.5: z1 = 2, z2 = 200"""

    def setUp(self):
        self.params = VisibilityParams(focal_length=2.0, drop_radius=0.5)

    def test_thresholds(self):
        self.assertEqual(self.params.z1, 2.0)
        self.assertEqual(self.params.z2, 200.0)

    def test_regimes(self):
        self.assertIs(visibility_regime(1.0, self.params), VisibilityRegime.CAMERA_LIMITED)
        self.assertIs(visibility_regime(2.0, self.params), VisibilityRegime.INVERSE_DEPTH_DECAY)
        self.assertIs(visibility_regime(199.0, self.params), VisibilityRegime.INVERSE_DEPTH_DECAY)
        self.assertIs(visibility_regime(200.0, self.params), VisibilityRegime.AGGREGATE_SCATTERING)

    def test_visibility_is_continuous_at_z1(self):
        self.assertEqual(particle_visibility(1.999, self.params), 1.0)
        self.assertEqual(particle_visibility(2.0, self.params), 1.0)
        self.assertAlmostEqual(particle_visibility(10.0, self.params), 0.2)
        self.assertEqual(particle_visibility(500.0, self.params), 0.0)

    def test_invalid_params(self):
        with self.assertRaises(ConfigError):
            VisibilityParams(focal_length=0.0, drop_radius=0.5)
        with self.assertRaises(ConfigError):
            VisibilityParams(focal_length=1.0, drop_radius=0.5, ratio=1.0)
        with self.assertRaises(DomainError):
            visibility_regime(-1.0, self.params)


class TestVolumetricAlpha(unittest.TestCase):

    def setUp(self):
        self.depth = depth_gradient(32, 32, far=60.0, near=3.0)
        self.cfg = VolumetricConfig(
            near_layers=(rain_layer(21, density=800.0, near=True),),
            far_layers=tuple(rain_layer(30 + i, density=1500.0) for i in range(4)),
            beta=0.02,
        )

    def test_matches_independent_recomputation(self):
        near, far = render_layers(self.cfg, (32, 32))
        expected = near[0].astype(np.float64) + \
            (1.0 - np.exp(-0.02 * self.depth.astype(np.float64))) * np.sum(far, axis=0, dtype=np.float64)
        alpha = volumetric_alpha(self.cfg, self.depth)
        unclamped = expected <= 1.0
        self.assertTrue(unclamped.mean() > 0.9)
        np.testing.assert_allclose(alpha[unclamped], expected[unclamped], atol=1e-6)
        self.assertTrue(np.all(alpha <= 1.0))

    def test_monotone_in_depth(self):
        near, far = render_layers(self.cfg, (32, 32))
        shallow = combine_alpha(near, far, np.full((32, 32), 5.0, dtype=np.float32), 0.02)
        deep = combine_alpha(near, far, np.full((32, 32), 80.0, dtype=np.float32), 0.02)
        self.assertTrue(np.all(deep >= shallow))

    def test_far_weight_bounds(self):
        w = far_weight(self.depth, 0.02)
        self.assertTrue(np.all((w >= 0.0) & (w < 1.0)))

    def test_empty_config_is_transparent(self):
        self.assertFalse(volumetric_alpha(VolumetricConfig(beta=0.01), self.depth).any())

    def test_layer_size_checked(self):
        with self.assertRaises(ShapeError):
            combine_alpha([np.zeros((8, 8), dtype=np.float32)], [], self.depth, 0.01)


class TestOcclusionComposite(unittest.TestCase):

    def setUp(self):
        self.B = smooth_scene(16, 16, seed=4, grid=False)
        self.alpha = np.linspace(0.0, 0.95, 256, dtype=np.float32).reshape(16, 16)

    def test_inverse_recovers_background(self):
        occ = OcclusionField(alpha=self.alpha, brightness=0.9)
        I = occlusion_composite(self.B, occ)
        B_hat = occlusion_invert(I, occ)
        self.assertLess(float(np.max(np.abs(B_hat - self.B))), 1e-4)

    def test_opaque_pixel_shows_particle(self):
        alpha = np.zeros((16, 16), dtype=np.float32)
        alpha[3, 4] = 1.0
        I = occlusion_composite(self.B, OcclusionField(alpha=alpha, brightness=0.7))
        self.assertAlmostEqual(float(I[3, 4, 0]), 0.7, places=6)
        np.testing.assert_array_equal(I[0, 0], self.B[0, 0])

    def test_invalid_inputs(self):
        with self.assertRaises(ConfigError):
            OcclusionField(alpha=np.full((2, 2), 1.5, dtype=np.float32), brightness=0.9)
        with self.assertRaises(ConfigError):
            occlusion_invert(self.B, OcclusionField(self.alpha, 0.9), alpha_max=1.0)


if __name__ == "__main__":
    unittest.main(verbosity=2)
