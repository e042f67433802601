#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Visible-particle occlusion: visibility regimes, volumetric alpha and compositing

    alpha(x) = clamp(alpha_near(x) + (1 - exp(-beta d(x))) * sum_l alpha_l(x), 0, 1)
    I(x)     = O alpha(x) + B(x) (1 - alpha(x))
    B^(x)    = (I(x) - O alpha') / (1 - alpha'),  alpha' = min(alpha(x), alpha_max)
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple, Dict, Any

import numpy as np

from .errors import ConfigError, DomainError
from .imgcore import (
    Image, ScalarMap, ensure_image, ensure_scalar_map, require_same_size, spatial_shape
)
from .particles import LayerSpec, generate_layer

logger = logging.getLogger("WeatherForge.Occlusion")

DEFAULT_ALPHA_MAX = 0.95
DEFAULT_RATIO = 100.0


# ==================== VISIBILITY ====================

class VisibilityRegime(Enum):
    """Режимы видимости частицы в зависимости от расстояния z"""
    CAMERA_LIMITED = "CameraLimited"
    INVERSE_DEPTH_DECAY = "InverseDepthDecay"
    AGGREGATE_SCATTERING = "AggregateScattering"


@dataclass(frozen=True)
class VisibilityParams:
    """Оптика камеры и капли: f, a (метры) и константа R"""
    focal_length: float
    drop_radius: float
    ratio: float = DEFAULT_RATIO

    def __post_init__(self):
        if self.focal_length <= 0 or self.drop_radius <= 0:
            raise ConfigError(
                f"focal length and drop radius must be positive, got "
                f"f={self.focal_length}, a={self.drop_radius}"
            )
        if self.ratio <= 1:
            raise ConfigError(f"ratio R must be > 1, got {self.ratio}")

    @property
    def z1(self) -> float:
        return 2.0 * self.focal_length * self.drop_radius

    @property
    def z2(self) -> float:
        return self.ratio * self.z1


def visibility_regime(z: float, params: VisibilityParams) -> VisibilityRegime:
    """z < z1: camera-limited; z1 <= z < z2: 1/z decay; z >= z2: aggregate scattering"""
    if z < 0:
        raise DomainError(f"distance must be >= 0, got {z}")
    if z < params.z1:
        return VisibilityRegime.CAMERA_LIMITED
    if z < params.z2:
        return VisibilityRegime.INVERSE_DEPTH_DECAY
    return VisibilityRegime.AGGREGATE_SCATTERING


def particle_visibility(z: float, params: VisibilityParams) -> float:
    """Relative visibility of one particle: 1, then z1/z, then 0 past z2"""
    regime = visibility_regime(z, params)
    if regime is VisibilityRegime.CAMERA_LIMITED:
        return 1.0
    if regime is VisibilityRegime.INVERSE_DEPTH_DECAY:
        return params.z1 / z
    return 0.0


# ==================== OCCLUSION FIELD ====================

@dataclass(frozen=True)
class OcclusionField:
    """Прозрачность alpha(x) и (постоянная) яркость частиц O"""
    alpha: ScalarMap
    brightness: float

    def __post_init__(self):
        alpha = ensure_scalar_map(self.alpha, "alpha")
        if alpha.size and (alpha.min() < 0.0 or alpha.max() > 1.0):
            raise ConfigError("alpha samples must lie in [0, 1]")
        if not (0.0 <= self.brightness <= 1.0):
            raise ConfigError(f"occlusion brightness O must be in [0, 1], got {self.brightness}")
        object.__setattr__(self, "alpha", alpha)


# ==================== VOLUMETRIC ALPHA ====================

@dataclass(frozen=True)
class VolumetricConfig:
    """Ближние слои (без учёта глубины) и N дальних тонких слоёв"""
    near_layers: Tuple[LayerSpec, ...] = ()
    far_layers: Tuple[LayerSpec, ...] = ()
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "near_layers", tuple(self.near_layers))
        object.__setattr__(self, "far_layers", tuple(self.far_layers))
        if self.beta < 0:
            raise ConfigError(f"beta must be >= 0, got {self.beta}")

    @property
    def is_empty(self) -> bool:
        return not self.near_layers and not self.far_layers

    def to_dict(self) -> dict:
        return {
            'near_layers': [s.to_dict() for s in self.near_layers],
            'far_layers': [s.to_dict() for s in self.far_layers],
            'beta': self.beta,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VolumetricConfig":
        return cls(
            near_layers=tuple(LayerSpec.from_dict(d) for d in data.get('near_layers', [])),
            far_layers=tuple(LayerSpec.from_dict(d) for d in data.get('far_layers', [])),
            beta=float(data.get('beta', 0.0)),
        )


def far_weight(depth: ScalarMap, beta: float) -> ScalarMap:
    """1 - exp(-beta d): distant pixels see more far-layer particles"""
    return (1.0 - np.exp(-np.float32(beta) * depth)).astype(np.float32)


def combine_alpha(near_maps: Sequence[ScalarMap], far_maps: Sequence[ScalarMap],
                  depth: ScalarMap, beta: float) -> ScalarMap:
    """Аддитивная композиция слоёв с последующим ограничением [0, 1]"""
    depth = ensure_scalar_map(depth, "depth")
    shape = spatial_shape(depth)
    alpha = np.zeros(shape, dtype=np.float32)
    for i, layer in enumerate(near_maps):
        require_same_size(("depth", depth), (f"near layer {i}", layer))
        alpha += layer
    if far_maps:
        far_sum = np.zeros(shape, dtype=np.float32)
        for i, layer in enumerate(far_maps):
            require_same_size(("depth", depth), (f"far layer {i}", layer))
            far_sum += layer
        alpha += far_weight(depth, beta) * far_sum
    return np.clip(alpha, 0.0, 1.0).astype(np.float32)


def render_layers(cfg: VolumetricConfig, shape: Tuple[int, int]) -> Tuple[List[ScalarMap], List[ScalarMap]]:
    near = [generate_layer(shape, spec) for spec in cfg.near_layers]
    far = [generate_layer(shape, spec) for spec in cfg.far_layers]
    return near, far


def volumetric_alpha(cfg: VolumetricConfig, depth: ScalarMap) -> ScalarMap:
    """Рендерит слои конфигурации под размер depth и объединяет их"""
    depth = ensure_scalar_map(depth, "depth")
    near, far = render_layers(cfg, spatial_shape(depth))
    return combine_alpha(near, far, depth, cfg.beta)


# ==================== COMPOSITING ====================

def _check_alpha_shape(img: Image, occ: OcclusionField, name: str) -> None:
    require_same_size((name, img), ("alpha", occ.alpha))


def occlusion_composite(B: Image, occ: OcclusionField) -> Image:
    """I = O alpha + B (1 - alpha)"""
    B = ensure_image(B, "B")
    _check_alpha_shape(B, occ, "B")
    a = occ.alpha[..., None]
    return (np.float32(occ.brightness) * a + B * (1.0 - a)).astype(np.float32)


def occlusion_invert(I: Image, occ: OcclusionField, alpha_max: float = DEFAULT_ALPHA_MAX) -> Image:
    """
    Обратное преобразование: B^ = (I - O alpha') / (1 - alpha')

    alpha' = min(alpha, alpha_max); the result is clamped to [0, 1].
    """
    if not (0.0 <= alpha_max < 1.0):
        raise ConfigError(f"alpha_max must be in [0, 1), got {alpha_max}")
    I = ensure_image(I, "I")
    _check_alpha_shape(I, occ, "I")
    a = np.minimum(occ.alpha, np.float32(alpha_max))[..., None]
    B = (I - np.float32(occ.brightness) * a) / (1.0 - a)
    return np.clip(B, 0.0, 1.0).astype(np.float32)
