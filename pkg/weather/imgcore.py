#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Image and scalar-map containers, colour conversion and file I/O

Image      -- numpy float32 array (H, W, 3), samples in [0, 1]
ScalarMap  -- numpy float32 array (H, W): depth, transmission, alpha

All physics is done in linear intensity; PNG samples are mapped linearly
(no sRGB decoding).
"""

import os
import zlib
import logging
from typing import Tuple

import numpy as np
import png
from numpy.typing import NDArray
from PIL import Image as PILImage

from .errors import ImageIOError, ImageFormatError, ShapeError

logger = logging.getLogger("WeatherForge.ImgCore")

Image = NDArray[np.float32]
ScalarMap = NDArray[np.float32]

SUPPORTED_BIT_DEPTHS = (8, 16)

# BT.601 studio swing, inputs in [0, 1]
_Y_WEIGHTS = np.array([65.481, 128.553, 24.966], dtype=np.float64)
_Y_OFFSET = 16.0


def ensure_image(img: np.ndarray, name: str = "image", check_range: bool = True) -> Image:
    """Проверяет инварианты Image и приводит к float32"""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ShapeError(f"{name} must be H x W x 3, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ShapeError(f"{name} has zero size: {arr.shape}")
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if check_range and arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0):
        raise ShapeError(f"{name} samples must lie in [0, 1]")
    return arr


def ensure_scalar_map(data: np.ndarray, name: str = "map") -> ScalarMap:
    """Проверяет инварианты ScalarMap и приводит к float32"""
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be H x W, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ShapeError(f"{name} has zero size: {arr.shape}")
    return np.ascontiguousarray(arr, dtype=np.float32)


def spatial_shape(arr: np.ndarray) -> Tuple[int, int]:
    return int(arr.shape[0]), int(arr.shape[1])


def require_same_size(*named: Tuple[str, np.ndarray]) -> None:
    """Raises ShapeError unless all rasters share height and width"""
    if not named:
        return
    ref_name, ref = named[0]
    ref_shape = spatial_shape(ref)
    for name, arr in named[1:]:
        if spatial_shape(arr) != ref_shape:
            raise ShapeError(
                f"size mismatch: {ref_name} is {ref_shape[0]}x{ref_shape[1]}, "
                f"{name} is {arr.shape[0]}x{arr.shape[1]}"
            )


# ==================== PNG ====================

def _read_png(path: str) -> Image:
    try:
        width, height, rows, info = png.Reader(filename=path).read()
        if info.get("palette") or info.get("greyscale") or info.get("alpha"):
            raise ImageFormatError("only RGB PNG without alpha is supported", path)
        bitdepth = info["bitdepth"]
        if bitdepth not in SUPPORTED_BIT_DEPTHS:
            raise ImageFormatError(f"unsupported PNG bit depth {bitdepth}", path)
        raw = np.vstack([np.asarray(row, dtype=np.uint16) for row in rows])
    except (ImageFormatError, ImageIOError):
        raise
    except FileNotFoundError as e:
        raise ImageIOError("file not found", path) from e
    except (png.Error, EOFError, OSError, zlib.error, ValueError) as e:
        raise ImageIOError(f"cannot decode PNG ({e})", path) from e

    if raw.shape != (height, width * 3):
        raise ImageIOError("truncated PNG data", path)
    maxval = float((1 << bitdepth) - 1)
    return (raw.reshape(height, width, 3).astype(np.float64) / maxval).astype(np.float32)


def quantize(img: Image, bit_depth: int) -> np.ndarray:
    """Округление к ближайшему чётному (round half to even)"""
    if bit_depth not in SUPPORTED_BIT_DEPTHS:
        raise ImageFormatError(f"unsupported bit depth {bit_depth}")
    maxval = (1 << bit_depth) - 1
    scaled = np.rint(np.clip(img.astype(np.float64), 0.0, 1.0) * maxval)
    return scaled.astype(np.uint8 if bit_depth == 8 else np.uint16)


def _write_png(img: Image, path: str, bit_depth: int) -> None:
    q = quantize(img, bit_depth)
    h, w = spatial_shape(q)
    try:
        if bit_depth == 8:
            PILImage.fromarray(q).save(path, format="PNG")
        else:
            writer = png.Writer(width=w, height=h, greyscale=False, bitdepth=16)
            with open(path, "wb") as f:
                writer.write(f, q.reshape(h, w * 3))
    except OSError as e:
        raise ImageIOError(f"cannot write PNG ({e})", path) from e


# ==================== PFM ====================

def _read_header_line(f, path: str) -> str:
    line = f.readline()
    if not line:
        raise ImageFormatError("missing PFM header token", path)
    return line.decode("ascii", errors="replace").strip()


def _read_pfm(path: str) -> Tuple[np.ndarray, int]:
    """Returns (data H x W [x 3], channels); rows are stored bottom-to-top"""
    try:
        with open(path, "rb") as f:
            ident = _read_header_line(f, path)
            if ident == "PF":
                channels = 3
            elif ident == "Pf":
                channels = 1
            else:
                raise ImageFormatError(f"unrecognized PFM identifier '{ident}'", path)

            dims = _read_header_line(f, path).split()
            if len(dims) != 2:
                raise ImageFormatError("missing PFM header token (width height)", path)
            try:
                width, height = int(dims[0]), int(dims[1])
                scale = float(_read_header_line(f, path))
            except ValueError as e:
                raise ImageFormatError(f"malformed PFM header ({e})", path) from e
            if width <= 0 or height <= 0 or scale == 0.0:
                raise ImageFormatError("invalid PFM dimensions or scale", path)

            dtype = np.dtype("<f4") if scale < 0 else np.dtype(">f4")
            count = width * height * channels
            buf = f.read(count * 4)
    except (ImageFormatError, ImageIOError):
        raise
    except FileNotFoundError as e:
        raise ImageIOError("file not found", path) from e
    except OSError as e:
        raise ImageIOError(f"cannot read PFM ({e})", path) from e

    if len(buf) != count * 4:
        raise ImageIOError("truncated PFM data", path)
    data = np.frombuffer(buf, dtype=dtype).astype(np.float32)
    shape = (height, width, 3) if channels == 3 else (height, width)
    return np.flipud(data.reshape(shape)).copy(), channels


def _write_pfm(data: np.ndarray, path: str) -> None:
    h, w = spatial_shape(data)
    ident = b"PF" if data.ndim == 3 else b"Pf"
    header = ident + b"\n" + f"{w} {h}\n".encode("ascii") + b"-1.0\n"
    body = np.flipud(np.asarray(data, dtype="<f4")).tobytes()
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(body)
    except OSError as e:
        raise ImageIOError(f"cannot write PFM ({e})", path) from e


# ==================== Public API ====================

def read_image(path: str) -> Image:
    """
    Читает RGB-изображение (8/16-bit PNG или PFM) в диапазон [0, 1]

    PFM samples are clamped to [0, 1].
    """
    path = os.fspath(path)
    if not os.path.exists(path):
        raise ImageIOError("file not found", path)
    if path.lower().endswith(".pfm"):
        data, channels = _read_pfm(path)
        if channels != 3:
            raise ImageFormatError("expected a 3-channel PFM image", path)
        return np.clip(data, 0.0, 1.0)
    return _read_png(path)


def write_image(img: Image, path: str, bit_depth: int = 8) -> None:
    """
    Записывает изображение: PNG (8/16 бит) или PFM по расширению файла

    bit_depth is ignored for .pfm paths.
    """
    img = ensure_image(img)
    path = os.fspath(path)
    if path.lower().endswith(".pfm"):
        _write_pfm(img, path)
    else:
        if bit_depth not in SUPPORTED_BIT_DEPTHS:
            raise ImageFormatError(f"unsupported bit depth {bit_depth}", path)
        _write_png(img, path, bit_depth)
    logger.debug(f"Wrote {path}")


def read_scalar_map(path: str) -> ScalarMap:
    """Reads a single-channel PFM at full float precision"""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise ImageIOError("file not found", path)
    data, channels = _read_pfm(path)
    if channels != 1:
        raise ImageFormatError("expected a single-channel PFM map", path)
    return data


def write_scalar_map(data: ScalarMap, path: str) -> None:
    _write_pfm(ensure_scalar_map(data), os.fspath(path))


def rgb_to_y(img: Image) -> ScalarMap:
    """Y = (65.481 R + 128.553 G + 24.966 B + 16) / 255, BT.601"""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ShapeError(f"rgb_to_y expects H x W x 3, got {arr.shape}")
    out_dtype = np.result_type(arr.dtype, np.float32)
    y = (arr.astype(np.float64) @ _Y_WEIGHTS + _Y_OFFSET) / 255.0
    return y.astype(out_dtype)
