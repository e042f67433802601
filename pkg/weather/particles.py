#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Procedural rain/snow particle layers for occlusion synthesis

Features:
- Rain streaks: anti-aliased line segments at a given angle from vertical
- Snowflakes: Gaussian-falloff ellipses with random eccentricity
- Optional Gaussian blur per layer
- Every layer is a pure function of (shape, LayerSpec), seed included
"""

import math
import logging
from dataclasses import dataclass, asdict
from enum import Enum
from typing import Dict, Any, Tuple

import numpy as np
from scipy import ndimage

from .errors import ConfigError, ShapeError
from .imgcore import ScalarMap
from .seeding import make_rng

logger = logging.getLogger("WeatherForge.Particles")

# Эксцентриситет снежинок: отношение малой полуоси к большой
SNOW_ECCENTRICITY = (0.6, 1.0)
# Яркость отдельной частицы относительно peak_alpha
PARTICLE_INTENSITY = (0.6, 1.0)
# Снежинка обрезается на этом нормированном радиусе
SNOW_SUPPORT = 1.5


class ParticleKind(Enum):
    """Типы частиц"""
    RAIN = "rain"
    SNOW = "snow"


@dataclass(frozen=True)
class LayerSpec:
    """Конфигурация одного слоя частиц"""
    kind: ParticleKind
    density: float                      # частиц на мегапиксель
    peak_alpha: float = 0.8
    seed: int = 0
    blur_sigma: float = 0.0             # пиксели
    # rain
    angle: float = 0.0                  # градусы от вертикали
    angle_jitter: float = 0.0           # разброс угла между штрихами
    length: float = 20.0                # пиксели
    width: float = 1.0                  # пиксели
    # snow
    radius_range: Tuple[float, float] = (1.0, 3.0)

    def __post_init__(self):
        if not isinstance(self.kind, ParticleKind):
            object.__setattr__(self, "kind", ParticleKind(self.kind))
        object.__setattr__(self, "radius_range", tuple(float(r) for r in self.radius_range))
        if self.density < 0:
            raise ConfigError(f"layer density must be >= 0, got {self.density}")
        if not (0.0 <= self.peak_alpha <= 1.0):
            raise ConfigError(f"peak_alpha must be in [0, 1], got {self.peak_alpha}")
        if self.blur_sigma < 0:
            raise ConfigError(f"blur_sigma must be >= 0, got {self.blur_sigma}")
        if self.kind is ParticleKind.RAIN and not (self.length >= self.width >= 1.0):
            raise ConfigError(
                f"rain streaks need length >= width >= 1, got length={self.length}, width={self.width}"
            )
        if self.kind is ParticleKind.SNOW:
            r_min, r_max = self.radius_range
            if r_min > r_max:
                raise ConfigError(f"radius_range is inverted: {self.radius_range}")
            if r_min <= 0:
                raise ConfigError(f"snow radii must be positive, got {self.radius_range}")

    def particle_count(self, shape: Tuple[int, int]) -> int:
        """Количество частиц: round(density * h * w / 1e6)"""
        h, w = shape
        return int(round(self.density * h * w / 1e6))

    def to_dict(self) -> dict:
        data = asdict(self)
        data["kind"] = self.kind.value
        data["radius_range"] = list(self.radius_range)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LayerSpec":
        return cls(**data)


@dataclass(frozen=True)
class RainStreaks:
    """Seeded streak draws: segment end points (x = column, y = row) and intensity"""
    x0: np.ndarray
    y0: np.ndarray
    x1: np.ndarray
    y1: np.ndarray
    intensity: np.ndarray
    width: float

    def __len__(self) -> int:
        return len(self.intensity)


@dataclass(frozen=True)
class SnowFlakes:
    """Seeded flake draws: centres, semi-axes, orientation and intensity"""
    cx: np.ndarray
    cy: np.ndarray
    semi_major: np.ndarray
    semi_minor: np.ndarray
    orientation: np.ndarray
    intensity: np.ndarray

    def __len__(self) -> int:
        return len(self.intensity)


def _check_shape(shape: Tuple[int, int]) -> Tuple[int, int]:
    h, w = int(shape[0]), int(shape[1])
    if h <= 0 or w <= 0:
        raise ShapeError(f"layer shape must be non-empty, got {h}x{w}")
    return h, w


def _require_kind(spec: LayerSpec, kind: ParticleKind) -> None:
    if spec.kind is not kind:
        raise ConfigError(f"expected a {kind.value} layer spec, got {spec.kind.value}")


# ==================== RAIN ====================

def sample_rain_streaks(shape: Tuple[int, int], spec: LayerSpec) -> RainStreaks:
    """Разыгрывает штрихи дождя для слоя (детерминированно по seed)"""
    _require_kind(spec, ParticleKind.RAIN)
    h, w = _check_shape(shape)
    n = spec.particle_count((h, w))
    rng = make_rng(spec.seed)

    cx = rng.uniform(0.0, w, size=n)
    cy = rng.uniform(0.0, h, size=n)
    angles = np.deg2rad(spec.angle + rng.uniform(-spec.angle_jitter, spec.angle_jitter, size=n))
    intensity = rng.uniform(*PARTICLE_INTENSITY, size=n)

    half = spec.length / 2.0
    dx = np.sin(angles) * half
    dy = np.cos(angles) * half
    return RainStreaks(cx - dx, cy - dy, cx + dx, cy + dy, intensity, float(spec.width))


def streak_coverage(px: np.ndarray, py: np.ndarray, x0: float, y0: float,
                    x1: float, y1: float, width: float) -> np.ndarray:
    """
    Anti-aliased coverage of a segment of the given width at pixel centres

    coverage = clamp(width / 2 + 0.5 - dist, 0, 1)
    """
    vx, vy = x1 - x0, y1 - y0
    seg_len2 = vx * vx + vy * vy
    if seg_len2 > 0.0:
        s = np.clip(((px - x0) * vx + (py - y0) * vy) / seg_len2, 0.0, 1.0)
    else:
        s = np.zeros_like(px)
    dist = np.hypot(px - (x0 + s * vx), py - (y0 + s * vy))
    return np.clip(width / 2.0 + 0.5 - dist, 0.0, 1.0)


def _render_streaks(shape: Tuple[int, int], streaks: RainStreaks) -> np.ndarray:
    h, w = shape
    canvas = np.zeros((h, w), dtype=np.float64)
    reach = streaks.width / 2.0 + 1.0
    for i in range(len(streaks)):
        x0, y0, x1, y1 = streaks.x0[i], streaks.y0[i], streaks.x1[i], streaks.y1[i]
        c0 = max(int(math.floor(min(x0, x1) - reach)), 0)
        c1 = min(int(math.ceil(max(x0, x1) + reach)) + 1, w)
        r0 = max(int(math.floor(min(y0, y1) - reach)), 0)
        r1 = min(int(math.ceil(max(y0, y1) + reach)) + 1, h)
        if c0 >= c1 or r0 >= r1:
            continue
        py, px = np.mgrid[r0:r1, c0:c1].astype(np.float64)
        cov = streak_coverage(px, py, x0, y0, x1, y1, streaks.width) * streaks.intensity[i]
        np.maximum(canvas[r0:r1, c0:c1], cov, out=canvas[r0:r1, c0:c1])
    return canvas


def generate_rain_layer(shape: Tuple[int, int], spec: LayerSpec) -> ScalarMap:
    """
    Слой прозрачности дождя: штрихи под углом spec.angle, размытие blur_sigma

    Returns:
        H x W map with values in [0, spec.peak_alpha]
    """
    streaks = sample_rain_streaks(shape, spec)
    canvas = _render_streaks(_check_shape(shape), streaks)
    return _finish_layer(canvas, spec)


# ==================== SNOW ====================

def sample_snow_flakes(shape: Tuple[int, int], spec: LayerSpec) -> SnowFlakes:
    """Разыгрывает снежинки для слоя (детерминированно по seed)"""
    _require_kind(spec, ParticleKind.SNOW)
    h, w = _check_shape(shape)
    n = spec.particle_count((h, w))
    rng = make_rng(spec.seed)

    cx = rng.uniform(0.0, w, size=n)
    cy = rng.uniform(0.0, h, size=n)
    radius = rng.uniform(spec.radius_range[0], spec.radius_range[1], size=n)
    ecc = rng.uniform(*SNOW_ECCENTRICITY, size=n)
    orientation = rng.uniform(0.0, math.pi, size=n)
    intensity = rng.uniform(*PARTICLE_INTENSITY, size=n)
    return SnowFlakes(cx, cy, radius, radius * ecc, orientation, intensity)


def _render_flakes(shape: Tuple[int, int], flakes: SnowFlakes) -> np.ndarray:
    h, w = shape
    canvas = np.zeros((h, w), dtype=np.float64)
    for i in range(len(flakes)):
        a, b = flakes.semi_major[i], flakes.semi_minor[i]
        reach = a * SNOW_SUPPORT + 1.0
        cx, cy = flakes.cx[i], flakes.cy[i]
        c0, c1 = max(int(math.floor(cx - reach)), 0), min(int(math.ceil(cx + reach)) + 1, w)
        r0, r1 = max(int(math.floor(cy - reach)), 0), min(int(math.ceil(cy + reach)) + 1, h)
        if c0 >= c1 or r0 >= r1:
            continue
        py, px = np.mgrid[r0:r1, c0:c1].astype(np.float64)
        cos_o, sin_o = math.cos(flakes.orientation[i]), math.sin(flakes.orientation[i])
        u = (px - cx) * cos_o + (py - cy) * sin_o
        v = -(px - cx) * sin_o + (py - cy) * cos_o
        rho2 = (u / a) ** 2 + (v / b) ** 2
        value = np.where(rho2 <= SNOW_SUPPORT ** 2, np.exp(-2.0 * rho2), 0.0) * flakes.intensity[i]
        np.maximum(canvas[r0:r1, c0:c1], value, out=canvas[r0:r1, c0:c1])
    return canvas


def generate_snow_layer(shape: Tuple[int, int], spec: LayerSpec) -> ScalarMap:
    """
    Слой прозрачности снега: эллипсы с гауссовым спадом

    Returns:
        H x W map with values in [0, spec.peak_alpha]
    """
    flakes = sample_snow_flakes(shape, spec)
    canvas = _render_flakes(_check_shape(shape), flakes)
    return _finish_layer(canvas, spec)


# ==================== COMMON ====================

def _finish_layer(canvas: np.ndarray, spec: LayerSpec) -> ScalarMap:
    layer = canvas * spec.peak_alpha
    if spec.blur_sigma > 0.0 and layer.any():
        layer = ndimage.gaussian_filter(layer, sigma=spec.blur_sigma, mode="constant", cval=0.0)
    return np.clip(layer, 0.0, spec.peak_alpha).astype(np.float32)


def generate_layer(shape: Tuple[int, int], spec: LayerSpec) -> ScalarMap:
    """Диспетчер по типу слоя"""
    if spec.kind is ParticleKind.RAIN:
        return generate_rain_layer(shape, spec)
    return generate_snow_layer(shape, spec)
