#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Classical estimation of the weather priors t, A and alpha from one image

- dark channel and atmospheric light (brightest dark-channel pixels)
- transmission t^ = clamp(1 - omega * dark_channel(I / A), t_min, 1)
- occlusion: small bright connected components above a median background

All estimators are deterministic and free of shared state.
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .errors import ConfigError
from .imgcore import Image, ScalarMap, ensure_image, ensure_scalar_map, require_same_size
from .occlusion import DEFAULT_ALPHA_MAX, OcclusionField
from .scatter import DEFAULT_T_MIN

logger = logging.getLogger("WeatherForge.Priors")

# 8-связность для компонент окклюзии
_CONNECTIVITY = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class EstimatorSettings:
    """Параметры классических оценщиков и порогов обращения"""
    dark_patch: int = 15
    omega: float = 0.95
    top_frac: float = 0.001
    bright_thresh: float = 0.08
    size_max: int = 4000
    background_window: int = 7
    t_min: float = DEFAULT_T_MIN
    alpha_max: float = DEFAULT_ALPHA_MAX

    def __post_init__(self):
        _check_patch(self.dark_patch)
        _check_patch(self.background_window, "background_window")
        _check_fraction(self.omega, "omega")
        _check_fraction(self.top_frac, "top_frac")
        _check_fraction(self.t_min, "t_min")
        if not (0.0 <= self.alpha_max < 1.0):
            raise ConfigError(f"alpha_max must be in [0, 1), got {self.alpha_max}")
        if self.bright_thresh < 0:
            raise ConfigError(f"bright_thresh must be >= 0, got {self.bright_thresh}")
        if self.size_max < 1:
            raise ConfigError(f"size_max must be >= 1, got {self.size_max}")


def _check_patch(patch: int, name: str = "patch") -> None:
    if patch < 1 or patch % 2 == 0:
        raise ConfigError(f"{name} must be a positive odd number of pixels, got {patch}")


def _check_fraction(value: float, name: str) -> None:
    if not (0.0 < value <= 1.0):
        raise ConfigError(f"{name} must be in (0, 1], got {value}")


def _min_filter(channel_min: np.ndarray, patch: int) -> ScalarMap:
    # 'nearest' даёт тот же минимум, что и окно, обрезанное по краю
    return ndimage.minimum_filter(channel_min, size=patch, mode="nearest").astype(np.float32)


def dark_channel(img: Image, patch: int = 15) -> ScalarMap:
    """
    dc(x) = min over the patch window around x and over channels

    Raises:
        ConfigError: patch is even or < 1
    """
    _check_patch(patch)
    img = ensure_image(img, "image", check_range=False)
    return _min_filter(img.min(axis=2), patch)


def estimate_atmospheric_light(img: Image, dc: ScalarMap, top_frac: float = 0.001) -> float:
    """
    Средняя яркость (серое) по top_frac самых ярких пикселей тёмного канала

    Ties in the dark channel are broken by pixel index order.
    """
    _check_fraction(top_frac, "top_frac")
    img = ensure_image(img, "image")
    dc = ensure_scalar_map(dc, "dark channel")
    require_same_size(("image", img), ("dark channel", dc))

    n_pixels = dc.size
    n_top = max(1, int(math.floor(top_frac * n_pixels)))
    # Стабильная сортировка по убыванию: при равенстве раньше идёт меньший индекс
    order = np.argsort(-dc.ravel(), kind="stable")[:n_top]
    gray = img.reshape(-1, 3).astype(np.float64).mean(axis=1)
    A = float(gray[order].mean())
    logger.debug(f"Atmospheric light from {n_top} pixels: A={A:.4f}")
    return A


def estimate_transmission(img: Image, A: float, omega: float = 0.95, patch: int = 15,
                          t_min: float = DEFAULT_T_MIN) -> ScalarMap:
    """t^(x) = clamp(1 - omega * dark_channel(img / A)(x), t_min, 1)"""
    if A <= 0:
        raise ConfigError(f"atmospheric light must be > 0 to estimate transmission, got {A}")
    _check_fraction(omega, "omega")
    _check_fraction(t_min, "t_min")
    _check_patch(patch)
    img = ensure_image(img, "image")
    normalized = img.min(axis=2) / np.float32(A)
    t = 1.0 - np.float32(omega) * _min_filter(normalized, patch)
    return np.clip(t, t_min, 1.0).astype(np.float32)


def estimate_occlusion(img: Image, bright_thresh: float = 0.08, size_max: int = 4000,
                       background_window: int = 7,
                       transmission: Optional[ScalarMap] = None) -> OcclusionField:
    """
    Эвристическая оценка окклюзии (штрихи дождя, снежинки)

    Detected pixels are brighter than their median background by more
    than bright_thresh and belong to a connected component smaller than
    size_max pixels. O is the mean intensity of detected pixels and
    alpha^ = clamp((I - bg) / (O - bg), 0, 1) on them.

    The background is the median of the image after a 3 x 3 grey closing,
    so thin dark structures (edges, lines) do not pull it down. Haze
    attenuates particle contrast by t; when a transmission estimate is
    given the threshold is scaled by its median.
    """
    if bright_thresh < 0:
        raise ConfigError(f"bright_thresh must be >= 0, got {bright_thresh}")
    if size_max < 1:
        raise ConfigError(f"size_max must be >= 1, got {size_max}")
    _check_patch(background_window, "background_window")
    img = ensure_image(img, "image")

    threshold = bright_thresh
    if transmission is not None:
        transmission = ensure_scalar_map(transmission, "transmission")
        require_same_size(("image", img), ("transmission", transmission))
        threshold = bright_thresh * float(np.median(transmission))

    gray = img.astype(np.float64).mean(axis=2)
    closed = ndimage.grey_closing(gray, size=(3, 3), mode="mirror")
    background = ndimage.median_filter(closed, size=background_window, mode="mirror")
    excess = gray - background
    candidates = excess > threshold

    alpha = np.zeros(gray.shape, dtype=np.float32)
    labels, n_components = ndimage.label(candidates, structure=_CONNECTIVITY)
    if n_components == 0:
        return OcclusionField(alpha=alpha, brightness=1.0)

    sizes = np.bincount(labels.ravel())
    keep = sizes < size_max
    keep[0] = False
    detected = keep[labels]
    if not detected.any():
        return OcclusionField(alpha=alpha, brightness=1.0)

    O = float(gray[detected].mean())
    denom = O - background[detected]
    ratio = np.where(denom > 1e-6, excess[detected] / np.maximum(denom, 1e-6), 1.0)
    alpha[detected] = np.clip(ratio, 0.0, 1.0)
    logger.debug(f"Occlusion: {int(keep.sum())} components, {int(detected.sum())} pixels, O={O:.3f}")
    return OcclusionField(alpha=alpha, brightness=min(max(O, 0.0), 1.0))
