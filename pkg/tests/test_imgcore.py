#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests for image containers and file I/O
"""

import os
import sys
import tempfile
import unittest

import numpy as np
from PIL import Image as PILImage

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from weather.errors import ImageFormatError, ImageIOError, ShapeError
from weather.imgcore import (
    ensure_image, quantize, read_image, read_scalar_map, require_same_size, rgb_to_y,
    write_image, write_scalar_map
)


class TestPFM(unittest.TestCase):
    """PFM: полная точность float32, строки снизу вверх"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name: str) -> str:
        return os.path.join(self.tmp.name, name)

    def test_image_is_bit_exact(self):
        img = np.random.default_rng(0).random((5, 7, 3)).astype(np.float32)
        write_image(img, self.path("a.pfm"))
        np.testing.assert_array_equal(read_image(self.path("a.pfm")), img)

    def test_rows_stored_bottom_to_top(self):
        data = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)
        write_scalar_map(data, self.path("m.pfm"))
        with open(self.path("m.pfm"), "rb") as f:
            raw = f.read()
        self.assertTrue(raw.startswith(b"Pf\n2 2\n-1.0\n"))
        body = np.frombuffer(raw[len(b"Pf\n2 2\n-1.0\n"):], dtype="<f4")
        np.testing.assert_array_equal(body, [3.0, 4.0, 1.0, 2.0])

    def test_big_endian_is_read(self):
        with open(self.path("be.pfm"), "wb") as f:
            f.write(b"Pf\n2 1\n1.0\n")
            f.write(np.array([0.25, 7.5], dtype=">f4").tobytes())
        np.testing.assert_array_equal(read_scalar_map(self.path("be.pfm")), [[0.25, 7.5]])

    def test_bad_identifier(self):
        with open(self.path("bad.pfm"), "wb") as f:
            f.write(b"P6\n2 2\n-1.0\n" + b"\0" * 16)
        with self.assertRaises(ImageFormatError):
            read_scalar_map(self.path("bad.pfm"))

    def test_truncated_data(self):
        with open(self.path("short.pfm"), "wb") as f:
            f.write(b"Pf\n4 4\n-1.0\n" + b"\0" * 12)
        with self.assertRaises(ImageIOError):
            read_scalar_map(self.path("short.pfm"))

    def test_channel_count_checked(self):
        write_image(np.zeros((2, 2, 3), dtype=np.float32), self.path("rgb.pfm"))
        with self.assertRaises(ImageFormatError):
            read_scalar_map(self.path("rgb.pfm"))

    def test_missing_file_is_os_error(self):
        with self.assertRaises(OSError) as ctx:
            read_image(self.path("nope.png"))
        self.assertIsInstance(ctx.exception, ImageIOError)
        self.assertEqual(ctx.exception.path, self.path("nope.png"))


class TestPNG(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_16_bit_quantization_error(self):
        img = np.random.default_rng(1).random((6, 9, 3)).astype(np.float32)
        path = os.path.join(self.tmp.name, "a.png")
        write_image(img, path, bit_depth=16)
        back = read_image(path)
        self.assertLessEqual(float(np.max(np.abs(back - img))), 0.5 / 65535 + 1e-7)

    def test_8_bit_values(self):
        img = np.zeros((2, 3, 3), dtype=np.float32)
        img[0, 0] = (1.0, 0.5, 0.0)
        path = os.path.join(self.tmp.name, "b.png")
        write_image(img, path)
        back = read_image(path)
        np.testing.assert_allclose(back[0, 0], [1.0, 128 / 255, 0.0], atol=1e-7)

    def test_8_bit_random_round_trip(self):
        img = np.random.default_rng(4).random((12, 10, 3)).astype(np.float32)
        path = os.path.join(self.tmp.name, "r.png")
        write_image(img, path, bit_depth=8)
        back = read_image(path)
        self.assertLessEqual(float(np.max(np.abs(back - img))), 1.0 / 510 + 1e-7)

    def test_greyscale_rejected(self):
        path = os.path.join(self.tmp.name, "grey.png")
        PILImage.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(path)
        with self.assertRaises(ImageFormatError):
            read_image(path)

    def test_unsupported_bit_depth(self):
        with self.assertRaises(ImageFormatError):
            write_image(np.zeros((2, 2, 3), dtype=np.float32), os.path.join(self.tmp.name, "c.png"), bit_depth=12)

    def test_quantize_rounds_half_to_even(self):
        q = quantize(np.full((1, 2, 3), 0.5, dtype=np.float32), 8)
        self.assertTrue(np.all(q == 128))


class TestContainers(unittest.TestCase):

    def test_image_shape_checked(self):
        with self.assertRaises(ShapeError):
            ensure_image(np.zeros((4, 4)))
        with self.assertRaises(ShapeError):
            ensure_image(np.zeros((0, 4, 3)))

    def test_image_range_checked(self):
        with self.assertRaises(ShapeError):
            ensure_image(np.full((2, 2, 3), 1.5))

    def test_size_mismatch_names_both_rasters(self):
        with self.assertRaises(ShapeError) as ctx:
            require_same_size(("clean", np.zeros((4, 5, 3))), ("depth", np.zeros((4, 6))))
        self.assertIn("clean", str(ctx.exception))
        self.assertIn("depth", str(ctx.exception))

    def test_luma_of_white_and_black(self):
        y = rgb_to_y(np.stack([np.ones((1, 1, 3)), np.zeros((1, 1, 3))]).reshape(2, 1, 3))
        self.assertAlmostEqual(float(y[0, 0]), 235.0 / 255.0, places=6)
        self.assertAlmostEqual(float(y[1, 0]), 16.0 / 255.0, places=6)

    def test_luma_of_mid_gray(self):
        mid = rgb_to_y(np.full((1, 1, 3), 0.5))
        self.assertAlmostEqual(float(mid[0, 0]), (16.0 + 235.0) / 2 / 255.0, places=6)

    def test_luma_is_affine(self):
        rng = np.random.default_rng(8)
        x, y = rng.random((5, 5, 3)), rng.random((5, 5, 3))
        for a in (0.0, 0.25, 0.7, 1.0):
            np.testing.assert_allclose(rgb_to_y(a * x + (1 - a) * y), a * rgb_to_y(x) + (1 - a) * rgb_to_y(y),
                                       atol=1e-9)


if __name__ == "__main__":
    unittest.main(verbosity=2)
